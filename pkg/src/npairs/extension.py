"""The two operations that grow complementing pairs, and their legality.

Starting from a pair (T, S) tiling the orthant in n variables:

* a first-type extension grafts an interval pair (C, D) of size N along one
  axis: that coordinate is dilated by N and C is added on the T side, D on
  the S side.  The dimension is unchanged.

* a second-type extension substitutes one axis by a monomial block: the
  chosen coordinate k becomes the point k*a in m >= 2 fresh coordinates
  (a has all entries >= 1), and exactly one side is additionally summed with
  the staircase complement of a, selected by delta (1: the T side, 0: the
  S side).  The dimension grows by m - 1.

Both outputs tile the orthant again.  A second-type extension applied to a
trivial one-dimensional pair with the staircase landed on the already-full
side is *illegal*: it is the one case that produces a Cartesian product
(a separable pair) instead of keeping primitivity.

tree_extend realizes both operations as surgery on a weighted tree, without
expanding any sets: a first-type step rewrites the interval weight at a top
(or grafts onto the initial pair when the tree is a bare root); a
second-type step attaches the fresh coordinates as children of that top.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BoxInsufficiencyError, ValidationError
from .lattice_sets import Box, BoxSet, minkowski_sum, staircase_set
from .one_dim import IntervalPair, NPairSpec

import numpy as np


@dataclass(frozen=True)
class ExtensionStep:
    """One extension: kind "first" (axis + interval pair) or "second"
    (axis + delta + block corner).  `axis` is an integer for pair-level
    operations and a top name for tree surgery."""

    kind: str
    axis: int | str
    interval: IntervalPair | None = None
    delta: int | None = None
    block: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind == "first":
            if self.interval is None:
                raise ValidationError("first-type step needs an interval pair")
        elif self.kind == "second":
            if self.delta not in (0, 1):
                raise ValidationError("second-type step needs delta in {0, 1}")
            block = tuple(int(x) for x in self.block or ())
            if len(block) < 2 or any(x < 1 for x in block):
                raise ValidationError(
                    "second-type step needs a block of >= 2 positive entries"
                )
            object.__setattr__(self, "block", block)
        else:
            raise ValidationError(f"unknown step kind {self.kind!r}")


def first_type_step(axis, interval: IntervalPair) -> ExtensionStep:
    return ExtensionStep("first", axis, interval=interval)


def second_type_step(axis, delta: int, block) -> ExtensionStep:
    return ExtensionStep("second", axis, delta=delta, block=tuple(block))


def _axis_point(value: int, axis: int, b: Box) -> BoxSet:
    coords = np.zeros((1, b.dim), dtype=np.int64)
    coords[0, axis] = value
    return BoxSet.from_coords(coords, b)


def extend_first(
    t: BoxSet, s: BoxSet, axis: int, interval: IntervalPair, out_bound: int | None = None
) -> tuple[BoxSet, BoxSet]:
    """Graft an interval pair along an axis: dilate it by the pair's size,
    then add C on the T side and D on the S side."""
    if t.dim != s.dim:
        raise ValueError("pair sides must share dimension")
    if not 0 <= axis < t.dim:
        raise ValueError(f"axis {axis} out of range")
    n = interval.size
    out = []
    for side, digits in ((t, interval.c), (s, interval.d)):
        provable = n * side.box.bounds[axis]
        bound = provable if out_bound is None else int(out_bound)
        if bound > provable:
            raise BoxInsufficiencyError(
                f"axis depth {side.box.bounds[axis]} supports only {provable} after grafting"
            )
        out_box = Box(
            tuple(bound if j == axis else m for j, m in enumerate(side.box.bounds))
        )
        dilated = side
        if n > 1:
            coords = side.coords.copy()
            coords[:, axis] *= n
            keep = coords[:, axis] < bound
            dilated = BoxSet.from_coords(coords[keep], out_box)
        else:
            dilated = side.restrict(out_box)
        digit_set = BoxSet.from_coords(
            np.asarray(
                [[d if j == axis else 0 for j in range(side.dim)] for d in digits if d < bound],
                dtype=np.int64,
            ).reshape(-1, side.dim),
            out_box,
        )
        out.append(minkowski_sum(dilated, digit_set, out_box, assert_direct=True))
    return out[0], out[1]


def extend_second(
    t: BoxSet,
    s: BoxSet,
    axis: int,
    delta: int,
    block,
    block_bounds: tuple[int, ...] | None = None,
) -> tuple[BoxSet, BoxSet]:
    """Substitute an axis by a monomial block and add one staircase factor.

    The axis-j coordinate k of every point becomes the block k * a.  The
    side selected by delta (1: T, 0: S) is then summed with the staircase
    complement of a on the new coordinates.  The result has n + m - 1
    coordinates, the block sitting where axis j was.

    The block box defaults to a_i * depth per new axis.  Any requested
    block_bounds G is accepted when min_i ceil(G_i / a_i) <= depth, the
    exact condition for every point of the block box to be derivable.
    """
    a = tuple(int(x) for x in block)
    m = len(a)
    if m < 2:
        raise ValidationError("second-type extension needs >= 2 new coordinates")
    if any(x < 1 for x in a):
        raise ValidationError(f"block corner must have all entries >= 1: {a}")
    if delta not in (0, 1):
        raise ValidationError("delta must be 0 or 1")
    if t.dim != s.dim:
        raise ValueError("pair sides must share dimension")
    if not 0 <= axis < t.dim:
        raise ValueError(f"axis {axis} out of range")

    depth = min(t.box.bounds[axis], s.box.bounds[axis])
    g = tuple(int(x) for x in block_bounds) if block_bounds else tuple(x * depth for x in a)
    if len(g) != m or any(x < 1 for x in g):
        raise ValueError(f"bad block bounds {g}")
    need = min(-(-gi // ai) for gi, ai in zip(g, a))
    out = []
    for side, has_staircase in ((t, delta == 1), (s, delta == 0)):
        if need > side.box.bounds[axis]:
            raise BoxInsufficiencyError(
                f"block bounds {g} need axis depth {need}, have {side.box.bounds[axis]}"
            )
        bounds = side.box.bounds[:axis] + g + side.box.bounds[axis + 1 :]
        out_box = Box(bounds)
        k = side.coords[:, axis]
        kmax = min(-(-gi // ai) for gi, ai in zip(g, a))
        keep = k < kmax
        rows = side.coords[keep]
        blockcols = rows[:, axis : axis + 1] * np.asarray(a, dtype=np.int64)[None, :]
        coords = np.hstack([rows[:, :axis], blockcols, rows[:, axis + 1 :]])
        substituted = BoxSet.from_coords(coords, out_box)
        if has_staircase:
            stairs = staircase_set(a, Box(g))
            emb = np.zeros((len(stairs), out_box.dim), dtype=np.int64)
            emb[:, axis : axis + m] = stairs.coords
            substituted = minkowski_sum(
                substituted, BoxSet.from_coords(emb, out_box), out_box, assert_direct=True
            )
        out.append(substituted)
    return out[0], out[1]


def is_illegal(descriptor, step: ExtensionStep) -> bool:
    """Is this second-type step illegal on the given one-dimensional pair?

    Illegal means the staircase factor lands on the side that is already
    everything: ({0}, all) with delta=0, or (all, {0}) with delta=1.  The
    descriptor is an NPairSpec or an explicit (BoxSet, BoxSet) pair, judged
    within its box.
    """
    if step.kind != "second":
        raise ValueError("legality only applies to second-type steps")
    if isinstance(descriptor, NPairSpec):
        special = descriptor.special
    else:
        t, s = descriptor
        if t.dim != 1 or s.dim != 1:
            return False
        special = None
        if len(t) == 1 and len(s) == s.box.bounds[0]:
            special = "zero-T"
        elif len(s) == 1 and len(t) == t.box.bounds[0]:
            special = "zero-S"
    return (special == "zero-T" and step.delta == 0) or (
        special == "zero-S" and step.delta == 1
    )


def apply_step(t: BoxSet, s: BoxSet, step: ExtensionStep, **kwargs) -> tuple[BoxSet, BoxSet]:
    """Apply a pair-level extension step (axis must be an integer)."""
    if not isinstance(step.axis, int):
        raise ValueError("pair-level steps need an integer axis")
    if step.kind == "first":
        return extend_first(t, s, step.axis, step.interval, **kwargs)
    return extend_second(t, s, step.axis, step.delta, step.block, **kwargs)


def tree_extend(tree, step: ExtensionStep, new_names=None):
    """Apply an extension as weighted-tree surgery at a named top.

    First type: the top's interval weight (C0, D0) of size N0 becomes
    (C + N*C0, D + N*D0); at a bare root the interval chain is grafted onto
    the initial pair instead.  Second type: the new coordinates become
    children of the top, which receives the step's delta; each child gets
    its block entry as scale and the trivial interval weight.
    """
    from .one_dim import compose_interval_prefix
    from .weighted_tree import WeightedTree, validate

    top = step.axis
    if top not in tree.tops:
        raise ValidationError(f"{top!r} is not a top of the tree")

    if step.kind == "first":
        pair = step.interval
        if top == tree.root:
            new_initial = compose_interval_prefix(tree.initial, pair)
            return WeightedTree(
                dict(tree.parent), tree.root, tree.tops, new_initial,
                dict(tree.delta), dict(tree.alpha), dict(tree.intervals),
            )
        old = tree.intervals[top]
        n = pair.size
        new_c = tuple(c + n * c0 for c in pair.c for c0 in old.c)
        new_d = tuple(d + n * d0 for d in pair.d for d0 in old.d)
        intervals = dict(tree.intervals)
        intervals[top] = IntervalPair(new_c, new_d)
        return WeightedTree(
            dict(tree.parent), tree.root, tree.tops, tree.initial,
            dict(tree.delta), dict(tree.alpha), intervals,
        )

    # second type
    if top == tree.root and is_illegal(tree.initial, step):
        raise ValidationError(
            "illegal extension: the staircase side of a trivial pair is already full"
        )
    block = step.block
    m = len(block)
    existing = set(tree.parent) | {tree.root}
    if new_names is None:
        new_names, k = [], 1
        while len(new_names) < m:
            cand = f"{top}_{k}"
            if cand not in existing:
                new_names.append(cand)
            k += 1
    new_names = list(new_names)
    if len(new_names) != m or existing & set(new_names):
        raise ValidationError("need fresh names for the new coordinates")

    parent = dict(tree.parent)
    alpha = dict(tree.alpha)
    intervals = dict(tree.intervals)
    delta = dict(tree.delta)
    for name, b in zip(new_names, block):
        parent[name] = top
        alpha[name] = int(b)
        intervals[name] = IntervalPair.trivial()
    delta[top] = int(step.delta)
    pos = tree.tops.index(top)
    tops = tree.tops[:pos] + tuple(new_names) + tree.tops[pos + 1 :]
    new_tree = WeightedTree(parent, tree.root, tops, tree.initial, delta, alpha, intervals)
    problems = validate(new_tree)
    if problems:
        raise ValidationError("; ".join(problems))
    return new_tree
