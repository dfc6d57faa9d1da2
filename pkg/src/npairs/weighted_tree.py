"""Weighted trees: the symbolic form of a primitive complementing pair.

A weighted tree is a finite rooted tree whose leaves ("tops") are the
coordinates of the pair it generates.  Its weight consists of:

* an initial one-dimensional pair spec attached to the root,
* delta: {0,1} on every non-top node (which side receives the staircase
  factor when that node's children are created),
* alpha: a positive scale on every non-root node,
* an interval pair on every non-root node.

The tree must couple delta at the root with a trivial initial pair: if the
first side of the initial pair is {0}, the root's delta is 1, and 0 when the
second side is {0}.  This is exactly what rules out the one illegal
extension.

Generation proceeds by branch elimination: pick a node all of whose
children are tops, generate the pair of the smaller tree in which that node
is itself a top, then substitute that coordinate by the children's monomial
block (with the node's delta choosing the staircase side) and graft each
child's interval pair along its new axis.  The result is independent of the
elimination order.

Each node also contributes one closed-form factor: compose the node's
interval sides (the initial pair at the root) with the node's dilation
monomial, times an optional staircase factor over its children's monomials.
The generated sets are the direct-sum products of these factors, and every
partial product is a binary series; evaluate_factorization expands this
product, asserting binarity, as an independent route to the same sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, StructureError, ValidationError
from .extension import extend_first, extend_second
from .lattice_sets import Box, BoxSet, minkowski_sum, permute_axes, staircase_set
from .one_dim import (
    IntervalPair,
    NPairSpec,
    evaluate_npair,
    format_npair_spec,
    parse_npair_spec,
)


@dataclass(frozen=True)
class WeightedTree:
    """Immutable by convention: never mutate the dict fields."""

    parent: dict[str, str]  # non-root node -> its parent
    root: str
    tops: tuple[str, ...]  # leaves in axis order
    initial: NPairSpec
    delta: dict[str, int]  # non-top node -> {0, 1}
    alpha: dict[str, int]  # non-root node -> scale >= 1
    intervals: dict[str, IntervalPair]  # non-root node -> interval weight

    @property
    def nodes(self) -> set[str]:
        return {self.root, *self.parent}

    def children(self, node: str) -> list[str]:
        return [n for n, p in self.parent.items() if p == node]

    def is_top(self, node: str) -> bool:
        return node in self.tops

    def level(self, node: str) -> int:
        d = 0
        while node != self.root:
            node = self.parent[node]
            d += 1
        return d

    @property
    def norm(self) -> int:
        return len(self.nodes) - len(self.tops)


def lambda0(initial: NPairSpec, root: str = "phi") -> WeightedTree:
    """The bare-root tree; it generates its initial pair."""
    return WeightedTree({}, root, (root,), initial, {}, {}, {})


def validate(tree: WeightedTree) -> list[str]:
    """All structural violations, empty when the tree is well-formed."""
    problems = []
    nodes = tree.nodes
    if tree.root in tree.parent:
        problems.append("root must not have a parent")
    for n, p in tree.parent.items():
        if p not in nodes:
            problems.append(f"parent {p!r} of {n!r} is not a node")
    # acyclicity: every node must reach the root
    for n in tree.parent:
        seen, cur = {n}, n
        while cur in tree.parent:
            cur = tree.parent[cur]
            if cur in seen:
                problems.append(f"cycle through {n!r}")
                return problems
            seen.add(cur)
        if cur != tree.root:
            problems.append(f"{n!r} does not reach the root")
    leaves = {n for n in nodes if not tree.children(n)}
    if set(tree.tops) != leaves or len(tree.tops) != len(leaves):
        problems.append(f"tops {tree.tops} do not match the leaves {sorted(leaves)}")
    non_tops = nodes - set(tree.tops)
    if set(tree.delta) != non_tops:
        problems.append("delta must be defined exactly on non-top nodes")
    if any(v not in (0, 1) for v in tree.delta.values()):
        problems.append("delta values must be 0 or 1")
    non_root = nodes - {tree.root}
    if set(tree.alpha) != non_root:
        problems.append("alpha must be defined exactly on non-root nodes")
    if any(int(v) < 1 for v in tree.alpha.values()):
        problems.append("alpha values must be >= 1")
    if set(tree.intervals) != non_root:
        problems.append("interval weights must be defined exactly on non-root nodes")
    # trivial initial pairs force the root's delta
    if tree.root in tree.delta:
        special = tree.initial.special
        if special == "zero-T" and tree.delta[tree.root] != 1:
            problems.append("initial T side is {0}: the root's delta must be 1")
        if special == "zero-S" and tree.delta[tree.root] != 0:
            problems.append("initial S side is {0}: the root's delta must be 0")
    return problems


def axis_dilation(tree: WeightedTree, node: str, top: str) -> int:
    """Dilation the node's factor applies to a top's coordinate: the product
    of alpha * interval size along the path strictly below the node, 1 on
    the top itself, 0 off the node's subtree."""
    if node == top:
        return 1
    path = []
    cur = top
    while cur != tree.root:
        path.append(cur)
        cur = tree.parent[cur]
        if cur == node:
            return _path_product(tree, path)
    return 0


def _path_product(tree: WeightedTree, path) -> int:
    out = 1
    for v in path:
        out *= tree.alpha[v] * tree.intervals[v].size
    return out


def dilation_vector(tree: WeightedTree, node: str) -> tuple[int, ...]:
    return tuple(axis_dilation(tree, node, x) for x in tree.tops)


# ---------------------------------------------------------------------------
# Branch elimination and generation.
# ---------------------------------------------------------------------------


def admissible_parents(tree: WeightedTree) -> list[str]:
    """Nodes whose children are all tops: their branch can be eliminated."""
    out = []
    for n in sorted(tree.nodes):
        kids = tree.children(n)
        if kids and all(k in tree.tops for k in kids):
            out.append(n)
    return out


def _eliminate(tree: WeightedTree, z: str) -> tuple[WeightedTree, list[str]]:
    """Remove z's branch of tops; z becomes a top of the smaller tree at the
    first eliminated axis position."""
    branch = [x for x in tree.tops if tree.parent.get(x) == z]
    if not branch or set(branch) != set(tree.children(z)):
        raise ValidationError(f"{z!r} is not an admissible branch parent")
    pos = tree.tops.index(branch[0])
    tops = tuple(
        n for n in (tree.tops[:pos] + (z,) + tree.tops[pos:]) if n not in branch
    )
    parent = {n: p for n, p in tree.parent.items() if n not in branch}
    delta = {n: v for n, v in tree.delta.items() if n != z}
    alpha = {n: v for n, v in tree.alpha.items() if n not in branch}
    intervals = {n: v for n, v in tree.intervals.items() if n not in branch}
    return WeightedTree(parent, tree.root, tops, tree.initial, delta, alpha, intervals), branch


def _default_parent(tree: WeightedTree) -> str:
    cands = admissible_parents(tree)
    return max(cands, key=lambda z: (tree.level(z), [-ord(c) for c in z]))


def elimination_orders(tree: WeightedTree) -> list[tuple[str, ...]]:
    """Every admissible branch-elimination order (for order-independence
    testing; grows combinatorially with bushy trees)."""
    if not tree.parent:
        return [()]
    out = []
    for z in admissible_parents(tree):
        sub, _ = _eliminate(tree, z)
        out.extend((z,) + rest for rest in elimination_orders(sub))
    return out


def generate(tree: WeightedTree, b: Box, order=None) -> tuple[BoxSet, BoxSet]:
    """Expand the pair generated by the tree, exactly, on the given box.

    One coordinate per top, in the tree's top order.  `order` optionally
    prescribes the branch-elimination sequence (parent names); every
    admissible order yields the same sets.
    """
    problems = validate(tree)
    if problems:
        raise ValidationError("; ".join(problems))
    if b.dim != len(tree.tops):
        raise ValueError(f"box dimension {b.dim} != number of tops {len(tree.tops)}")
    queue = list(order) if order is not None else None
    t, s = _generate(tree, b, queue)
    if queue:
        raise ValidationError(f"elimination order has unused entries: {queue}")
    return t, s


def _generate(tree: WeightedTree, b: Box, queue) -> tuple[BoxSet, BoxSet]:
    if not tree.parent:
        return evaluate_npair(tree.initial, b)

    if queue is not None:
        if not queue:
            raise ValidationError("elimination order exhausted before the tree")
        z = queue.pop(0)
        if z not in admissible_parents(tree):
            raise ValidationError(f"{z!r} is not an admissible branch parent")
    else:
        z = _default_parent(tree)

    subtree, branch = _eliminate(tree, z)
    scales = [tree.alpha[x] for x in branch]
    sizes = [tree.intervals[x].size for x in branch]
    bb = b.bounds
    axis_of = {x: i for i, x in enumerate(tree.tops)}
    z_depth = min(
        -(-bb[axis_of[x]] // (a * n)) for x, a, n in zip(branch, scales, sizes)
    )
    sub_bounds = tuple(
        z_depth if n == z else bb[axis_of[n]] for n in subtree.tops
    )
    t, s = _generate(subtree, Box(sub_bounds), queue)

    zpos = subtree.tops.index(z)
    dz = tree.delta[z]
    if len(branch) == 1:
        x = branch[0]
        a1, n1 = scales[0], sizes[0]
        if a1 > 1:
            stair = (
                IntervalPair(tuple(range(a1)), (0,))
                if dz == 1
                else IntervalPair((0,), tuple(range(a1)))
            )
            t, s = extend_first(t, s, zpos, stair)
        if n1 > 1:
            t, s = extend_first(t, s, zpos, tree.intervals[x])
        inter = [x if n == z else n for n in subtree.tops]
    else:
        g = tuple(
            -(-bb[axis_of[x]] // n) for x, n in zip(branch, sizes)
        )
        t, s = extend_second(t, s, zpos, dz, tuple(scales), block_bounds=g)
        inter = list(subtree.tops[:zpos]) + branch + list(subtree.tops[zpos + 1 :])
        for x in branch:
            if tree.intervals[x].size > 1:
                t, s = extend_first(t, s, inter.index(x), tree.intervals[x])
    perm = [inter.index(x) for x in tree.tops]
    return permute_axes(t, perm).restrict(b), permute_axes(s, perm).restrict(b)


# ---------------------------------------------------------------------------
# Closed form: one factor per node.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FactorAtom:
    """One node's contribution to the direct-sum product.

    The base is a one-dimensional digit set (tuple) or the initial pair spec
    (at the root), composed with the node's dilation monomial `weight`.  The
    optional staircase part is (corner, child monomials): the staircase
    complement of the corner with its i-th coordinate composed with the i-th
    child monomial.  `delta` says which side of the pair carries it.
    """

    node: str
    weight: tuple[int, ...]
    t_base: tuple[int, ...] | NPairSpec
    s_base: tuple[int, ...] | NPairSpec
    staircase: tuple[tuple[int, ...], tuple[tuple[int, ...], ...]] | None = None
    delta: int | None = None


@dataclass(frozen=True)
class Factorization:
    dim: int
    atoms: tuple[FactorAtom, ...]


def closed_form(tree: WeightedTree) -> Factorization:
    """Build the per-node factors whose direct-sum product is the pair."""
    problems = validate(tree)
    if problems:
        raise ValidationError("; ".join(problems))
    atoms = []
    order = [tree.root] + sorted(tree.parent)
    for v in order:
        weight = dilation_vector(tree, v)
        if v == tree.root:
            t_base, s_base = tree.initial, tree.initial
        else:
            pair = tree.intervals[v]
            t_base, s_base = pair.c, pair.d
        kids = tree.children(v)
        if not kids:
            atoms.append(FactorAtom(v, weight, t_base, s_base))
            continue
        corner = tuple(tree.alpha[k] for k in kids)
        child_monomials = tuple(
            tuple(tree.intervals[k].size * w for w in dilation_vector(tree, k))
            for k in kids
        )
        atoms.append(
            FactorAtom(v, weight, t_base, s_base, (corner, child_monomials), tree.delta[v])
        )
    return Factorization(len(tree.tops), tuple(atoms))


def _monomial_depth(weight, bounds) -> int:
    """How many multiples of a monomial stay inside the box (exactly)."""
    return min(-(-m // w) for w, m in zip(weight, bounds) if w > 0)


def _expand_base(base, weight, b: Box) -> BoxSet:
    kmax = _monomial_depth(weight, b.bounds)
    if isinstance(base, NPairSpec):
        raise TypeError("spec bases are expanded by the caller")
    ks = np.asarray([k for k in base if k < kmax], dtype=np.int64)
    coords = ks[:, None] * np.asarray(weight, dtype=np.int64)[None, :]
    return BoxSet.from_coords(coords, b)


def _expand_atom_side(atom: FactorAtom, side: str, b: Box) -> BoxSet:
    base = atom.t_base if side == "T" else atom.s_base
    if isinstance(base, NPairSpec):
        kmax = _monomial_depth(atom.weight, b.bounds)
        t_vals, s_vals = evaluate_npair(base, kmax)
        vals = t_vals if side == "T" else s_vals
        coords = vals.coords[:, 0][:, None] * np.asarray(atom.weight, dtype=np.int64)[None, :]
        out = BoxSet.from_coords(coords, b)
    else:
        out = _expand_base(base, atom.weight, b)
    carries = atom.staircase is not None and (
        (side == "T" and atom.delta == 1) or (side == "S" and atom.delta == 0)
    )
    if carries:
        corner, monomials = atom.staircase
        stair_bounds = tuple(_monomial_depth(u, b.bounds) for u in monomials)
        stairs = staircase_set(corner, Box(stair_bounds))
        mat = np.asarray(monomials, dtype=np.int64)  # (m, dim)
        coords = stairs.coords @ mat
        stair_set = BoxSet.from_coords(coords, b)
        out = minkowski_sum(out, stair_set, b, assert_direct=True)
    return out


def evaluate_factorization(f: Factorization, b: Box) -> tuple[BoxSet, BoxSet]:
    """Expand the closed-form product on a box.

    Independent of generate(): multiplies per-node factors directly,
    asserting that every partial product stays binary (a direct sum).
    """
    if b.dim != f.dim:
        raise ValueError(f"box dimension {b.dim} != factorization dimension {f.dim}")
    out = []
    for side in ("T", "S"):
        factors = [_expand_atom_side(atom, side, b) for atom in f.atoms]
        factors.sort(key=len, reverse=True)
        acc = factors[0]
        for nxt in factors[1:]:
            try:
                acc = minkowski_sum(acc, nxt, b, assert_direct=True)
            except StructureError as exc:
                raise StructureError(
                    f"factor product lost binarity on side {side}: {exc}"
                ) from exc
        out.append(acc)
    return out[0], out[1]


# ---------------------------------------------------------------------------
# Tiling / class tests.
# ---------------------------------------------------------------------------


def finite_side(tree: WeightedTree) -> str | None:
    """Which generated side is a finite set: the initial pair's finite side
    survives exactly when every delta points the staircases away from it."""
    fin = tree.initial.finite_side
    if fin == "T" and all(v == 0 for v in tree.delta.values()):
        return "T"
    if fin == "S" and all(v == 1 for v in tree.delta.values()):
        return "S"
    return None


def is_class_f0(tree: WeightedTree) -> bool:
    """Every axis section trivial on one side: all top intervals trivial."""
    return all(tree.intervals[x].is_trivial for x in tree.tops if x != tree.root)


# ---------------------------------------------------------------------------
# Tree text format.
#
#   npair-tree v1
#   [tree]
#   node <name> parent <name>     (one line per non-root node; the root is
#                                  the node never introduced by a line, or
#                                  "phi" for the bare-root tree)
#   [initial]
#   radices ... tail=... parity=... | special=...
#   [delta]
#   <node> <0|1>
#   [alpha]
#   <node> <int>
#   [phi]
#   <node> C={...} D={...}        (or: <node> radices p1,p2 parity=C-even)
# ---------------------------------------------------------------------------

TREE_HEADER = "npair-tree v1"


def format_interval(pair: IntervalPair) -> str:
    c = ",".join(str(x) for x in pair.c)
    d = ",".join(str(x) for x in pair.d)
    return f"C={{{c}}} D={{{d}}}"


def _parse_digit_set(tok: str) -> tuple[int, ...]:
    if not (tok.startswith("{") and tok.endswith("}")):
        raise ParseError(f"expected {{...}} digit set, got {tok!r}")
    inner = tok[1:-1].strip()
    if not inner:
        raise ParseError("digit set may not be empty")
    try:
        return tuple(int(x) for x in inner.split(","))
    except ValueError:
        raise ParseError(f"bad digit set {tok!r}") from None


def parse_interval(text: str) -> IntervalPair:
    toks = text.split()
    if toks and toks[0] == "radices":
        radices = tuple(int(x) for x in toks[1].split(",") if x)
        opts = dict(t.split("=", 1) for t in toks[2:] if "=" in t)
        try:
            return IntervalPair.from_radices(radices, opts.get("parity", "C-even"))
        except ValidationError as exc:
            raise ParseError(str(exc)) from None
    opts = dict(t.split("=", 1) for t in toks if "=" in t)
    if "C" not in opts or "D" not in opts:
        raise ParseError(f"interval pair needs C={{...}} and D={{...}}: {text!r}")
    try:
        return IntervalPair(_parse_digit_set(opts["C"]), _parse_digit_set(opts["D"]))
    except ValidationError as exc:
        raise ParseError(str(exc)) from None


def format_tree(tree: WeightedTree) -> str:
    lines = [TREE_HEADER, "[tree]"]
    if tree.parent:
        # tops are listed last, in axis order: their file order is the axis order
        internal = sorted(
            (n for n in tree.parent if n not in tree.tops),
            key=lambda n: (tree.level(n), n),
        )
        for n in internal + list(tree.tops):
            lines.append(f"node {n} parent {tree.parent[n]}")
    else:
        lines.append(f"root {tree.root}")
    lines.append("[initial]")
    lines.append(format_npair_spec(tree.initial))
    lines.append("[delta]")
    for n in sorted(tree.delta):
        lines.append(f"{n} {tree.delta[n]}")
    lines.append("[alpha]")
    for n in sorted(tree.alpha):
        lines.append(f"{n} {tree.alpha[n]}")
    lines.append("[phi]")
    for n in sorted(tree.intervals):
        lines.append(f"{n} {format_interval(tree.intervals[n])}")
    return "\n".join(lines) + "\n"


def parse_tree(text: str) -> WeightedTree:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != TREE_HEADER:
        raise ParseError(f"tree file must start with {TREE_HEADER!r}")
    section = None
    parent: dict[str, str] = {}
    node_order: list[str] = []
    root_decl = None
    initial = None
    delta: dict[str, int] = {}
    alpha: dict[str, int] = {}
    intervals: dict[str, IntervalPair] = {}
    for ln in lines[1:]:
        if ln.startswith("["):
            if ln not in ("[tree]", "[initial]", "[delta]", "[alpha]", "[phi]"):
                raise ParseError(f"unknown section {ln}")
            section = ln
            continue
        if section == "[tree]":
            toks = ln.split()
            if len(toks) == 2 and toks[0] == "root":
                root_decl = toks[1]
            elif len(toks) == 4 and toks[0] == "node" and toks[2] == "parent":
                name, par = toks[1], toks[3]
                if name in parent:
                    raise ParseError(f"node {name!r} declared twice")
                parent[name] = par
                node_order.append(name)
            else:
                raise ParseError(f"bad tree line {ln!r}")
        elif section == "[initial]":
            if initial is not None:
                raise ParseError("more than one initial pair")
            initial = parse_npair_spec(ln)
        elif section == "[delta]":
            name, _, val = ln.partition(" ")
            try:
                delta[name] = int(val)
            except ValueError:
                raise ParseError(f"bad delta line {ln!r}") from None
        elif section == "[alpha]":
            name, _, val = ln.partition(" ")
            try:
                alpha[name] = int(val)
            except ValueError:
                raise ParseError(f"bad alpha line {ln!r}") from None
        elif section == "[phi]":
            name, _, rest = ln.partition(" ")
            intervals[name] = parse_interval(rest)
        else:
            raise ParseError(f"content before any section: {ln!r}")
    if initial is None:
        raise ParseError("missing [initial] section")
    if parent:
        roots = set(parent.values()) - set(parent)
        if len(roots) != 1:
            raise ParseError(f"tree must have exactly one root, found {sorted(roots)}")
        root = roots.pop()
    else:
        root = root_decl or "phi"
    children = set(parent.values())
    tops = tuple(n for n in node_order if n not in children)
    if not parent:
        tops = (root,)
    tree = WeightedTree(parent, root, tops, initial, delta, alpha, intervals)
    problems = validate(tree)
    if problems:
        raise ValidationError("; ".join(problems))
    return tree


def format_tree_summary(tree: WeightedTree) -> str:
    """Aligned table of the weights, one column per non-root node."""
    cols = [n for n in tree.tops if n != tree.root]
    cols += sorted(n for n in tree.parent if n not in tree.tops)
    rows = [
        ["node"] + cols,
        ["alpha"] + [str(tree.alpha[n]) for n in cols],
        ["C"] + ["{" + ",".join(map(str, tree.intervals[n].c)) + "}" for n in cols],
        ["D"] + ["{" + ",".join(map(str, tree.intervals[n].d)) + "}" for n in cols],
        ["N"] + [str(tree.intervals[n].size) for n in cols],
    ]
    widths = [max(len(r[i]) for r in rows) for i in range(len(cols) + 1)]
    table = "\n".join(
        "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows
    )
    deltas = ", ".join(f"{n}={tree.delta[n]}" for n in sorted(tree.delta))
    lines = [
        f"initial: {format_npair_spec(tree.initial)}",
        f"delta:   {deltas if deltas else '(none)'}",
        table,
    ]
    return "\n".join(lines) + "\n"
