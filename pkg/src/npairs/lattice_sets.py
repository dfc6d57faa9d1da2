"""Exact finite subsets of the nonnegative integer lattice, truncated to boxes.

Every set in this package lives in (Z>=0)^n but is handled through a finite
window: a BoxSet stores precisely the points of an underlying set that fall
inside an axis-aligned box [0,M1) x ... x [0,Mn), and asserts nothing outside
it.  Constructors compute the largest output box on which the result is
provably complete, so all verdicts downstream are sound relative to a box.

The central verification primitive is direct_sum_check: an exhaustive count,
for every point c of a box, of the decompositions c = a + b with a in A and
b in B.  A pair tiles the box exactly when every count equals one.  Because
coordinates are nonnegative, any summand of a point inside the box also lies
inside the box, so the check is exact whenever both operands are complete on
the checked box.

Points are plain tuples of Python ints at the API surface; internally a
BoxSet keeps an (k, n) int64 array sorted in lexicographic order (which
coincides with C-order flat-index order).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoxInsufficiencyError, StructureError

Point = tuple[int, ...]

# Guards for exact int64 index arithmetic.
_MAX_VOLUME = 2**62
_ENUM_LIMIT = 2**24  # refuse to materialise more points than this at once


@dataclass(frozen=True)
class Box:
    """An axis-aligned window prod_j [0, M_j) with every M_j >= 1."""

    bounds: tuple[int, ...]

    def __post_init__(self):
        if not self.bounds:
            raise ValueError("box must have dimension >= 1")
        if any(int(m) != m or m < 1 for m in self.bounds):
            raise ValueError(f"box bounds must be positive integers: {self.bounds}")
        object.__setattr__(self, "bounds", tuple(int(m) for m in self.bounds))
        if self.volume >= _MAX_VOLUME:
            raise ValueError("box volume too large for exact index arithmetic")

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def volume(self) -> int:
        v = 1
        for m in self.bounds:
            v *= m
        return v

    def strides(self) -> tuple[int, ...]:
        """C-order strides: flat index increases in lexicographic point order."""
        out = [1] * self.dim
        for j in range(self.dim - 2, -1, -1):
            out[j] = out[j + 1] * self.bounds[j + 1]
        return tuple(out)

    def contains_box(self, other: "Box") -> bool:
        return self.dim == other.dim and all(
            a >= b for a, b in zip(self.bounds, other.bounds)
        )

    def contains_point(self, p) -> bool:
        return len(p) == self.dim and all(0 <= c < m for c, m in zip(p, self.bounds))

    def meet(self, other: "Box") -> "Box":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        return Box(tuple(min(a, b) for a, b in zip(self.bounds, other.bounds)))


def box(*bounds: int) -> Box:
    """Shorthand constructor: box(4, 4) == Box((4, 4))."""
    return Box(tuple(bounds))


def _flat(coords: np.ndarray, b: Box) -> np.ndarray:
    strides = np.asarray(b.strides(), dtype=np.int64)
    return coords @ strides


def _unflat(flat: np.ndarray, b: Box) -> np.ndarray:
    out = np.empty((len(flat), b.dim), dtype=np.int64)
    rem = flat.astype(np.int64, copy=True)
    strides = b.strides()
    for j in range(b.dim):
        out[:, j], rem = np.divmod(rem, strides[j])
    return out


@dataclass(frozen=True, eq=False)
class BoxSet:
    """A lexicographically sorted, duplicate-free point set inside a box."""

    box: Box
    coords: np.ndarray  # (k, dim) int64, strictly increasing in flat order

    @classmethod
    def from_coords(cls, coords, b: Box) -> "BoxSet":
        coords = np.asarray(coords, dtype=np.int64).reshape(-1, b.dim)
        if coords.size:
            if coords.min() < 0 or (coords >= np.asarray(b.bounds)).any():
                raise ValueError("points outside box")
            flat = np.unique(_flat(coords, b))
            coords = _unflat(flat, b)
        coords.setflags(write=False)
        return cls(b, coords)

    @classmethod
    def from_points(cls, points, b: Box) -> "BoxSet":
        pts = list(points)
        if not pts:
            return cls.empty(b)
        return cls.from_coords(np.asarray(pts, dtype=np.int64), b)

    @classmethod
    def empty(cls, b: Box) -> "BoxSet":
        coords = np.empty((0, b.dim), dtype=np.int64)
        coords.setflags(write=False)
        return cls(b, coords)

    @classmethod
    def zero(cls, b: Box) -> "BoxSet":
        return cls.from_coords(np.zeros((1, b.dim), dtype=np.int64), b)

    @classmethod
    def full(cls, b: Box) -> "BoxSet":
        if b.volume > _ENUM_LIMIT:
            raise ValueError("box too large to enumerate in full")
        coords = _unflat(np.arange(b.volume, dtype=np.int64), b)
        coords.setflags(write=False)
        return cls(b, coords)

    @property
    def dim(self) -> int:
        return self.box.dim

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return (tuple(int(c) for c in row) for row in self.coords)

    def __contains__(self, p) -> bool:
        if not self.box.contains_point(p):
            return False
        flat = self.flat()
        i = np.searchsorted(flat, int(_flat(np.asarray([p], dtype=np.int64), self.box)[0]))
        return i < len(flat) and flat[i] == _flat(np.asarray([p], dtype=np.int64), self.box)[0]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BoxSet)
            and self.box == other.box
            and self.coords.shape == other.coords.shape
            and bool(np.array_equal(self.coords, other.coords))
        )

    def __repr__(self) -> str:
        head = ", ".join(map(str, self.points()[:6]))
        tail = ", ..." if len(self) > 6 else ""
        return f"BoxSet(box={self.box.bounds}, {len(self)} points: {head}{tail})"

    def flat(self) -> np.ndarray:
        return _flat(self.coords, self.box)

    def points(self) -> list[Point]:
        return [tuple(int(c) for c in row) for row in self.coords]

    def restrict(self, b: Box) -> "BoxSet":
        """Truncate to a sub-box; completeness carries over."""
        if not self.box.contains_box(b):
            raise BoxInsufficiencyError(
                f"cannot restrict box {self.box.bounds} to larger box {b.bounds}"
            )
        if b == self.box:
            return self
        keep = (self.coords < np.asarray(b.bounds)).all(axis=1)
        coords = self.coords[keep].copy()
        coords.setflags(write=False)
        return BoxSet(b, coords)

    def same_points(self, other: "BoxSet") -> bool:
        """Set equality ignoring the boxes (which must at least share dim)."""
        return self.dim == other.dim and bool(np.array_equal(self.coords, other.coords))


@dataclass(frozen=True)
class DirectSumReport:
    """Outcome of an exhaustive direct-sum check over a box."""

    ok: bool
    box: Box
    first_failure: Point | None = None
    witness_count: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def direct_sum_check(a: BoxSet, b: BoxSet, check_box: Box) -> DirectSumReport:
    """Verify that every point of check_box splits exactly once as a + b.

    Requires both operand boxes to contain check_box: any summand of a point
    inside the box is componentwise below it, so completeness on check_box
    makes the count exact.  Returns the lexicographically least failing point
    and its decomposition count on failure.
    """
    if a.dim != b.dim or a.dim != check_box.dim:
        raise ValueError("dimension mismatch")
    if not (a.box.contains_box(check_box) and b.box.contains_box(check_box)):
        raise BoxInsufficiencyError("operand boxes must contain the checked box")

    small, large = (a, b) if len(a) <= len(b) else (b, a)
    small = small.restrict(check_box)
    large = large.restrict(check_box)
    bounds = np.asarray(check_box.bounds, dtype=np.int64)
    volume = check_box.volume
    counts = np.zeros(volume, dtype=np.int64)
    if len(small) and len(large):
        lcoords = large.coords
        lflat = _flat(lcoords, check_box)
        strides = np.asarray(check_box.strides(), dtype=np.int64)
        # Work in chunks of the small operand so temporaries stay bounded.
        chunk = max(1, _ENUM_LIMIT // max(1, len(large)))
        for lo in range(0, len(small), chunk):
            rows = small.coords[lo : lo + chunk]
            # valid[i, l]: row i + large point l stays inside the box per axis
            valid = np.ones((len(rows), len(lcoords)), dtype=bool)
            for j in range(check_box.dim):
                np.logical_and(
                    valid, lcoords[:, j][None, :] < bounds[j] - rows[:, j][:, None], out=valid
                )
            offs = rows @ strides
            sums = (lflat[None, :] + offs[:, None])[valid]
            counts += np.bincount(sums, minlength=volume)

    bad = counts != 1
    if not bad.any():
        return DirectSumReport(True, check_box)
    idx = int(np.argmax(bad))
    point = tuple(int(c) for c in _unflat(np.asarray([idx], dtype=np.int64), check_box)[0])
    return DirectSumReport(False, check_box, point, int(counts[idx]))


def minkowski_sum(
    a: BoxSet, b: BoxSet, out_box: Box | None = None, assert_direct: bool = False
) -> BoxSet:
    """Truncated Minkowski sum (A + B) within out_box.

    The default output box is the componentwise minimum of the operand boxes:
    a sum point below both bounds can only arise from operand points below
    them, so the truncated sum is complete there.  With assert_direct, any
    point produced twice raises StructureError (the sum was not direct).
    """
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    provable = a.box.meet(b.box)
    out_box = out_box or provable
    if not provable.contains_box(out_box):
        raise BoxInsufficiencyError(
            f"requested box {out_box.bounds} exceeds provable box {provable.bounds}"
        )
    a = a.restrict(a.box.meet(out_box))
    b = b.restrict(b.box.meet(out_box))
    if not len(a) or not len(b):
        return BoxSet.empty(out_box)

    small, large = (a, b) if len(a) <= len(b) else (b, a)
    bounds = np.asarray(out_box.bounds, dtype=np.int64)
    strides = np.asarray(out_box.strides(), dtype=np.int64)
    lcoords = large.coords
    lflat = lcoords @ strides
    pieces = []
    chunk = max(1, _ENUM_LIMIT // max(1, len(large)))
    for lo in range(0, len(small), chunk):
        rows = small.coords[lo : lo + chunk]
        valid = np.ones((len(rows), len(lcoords)), dtype=bool)
        for j in range(out_box.dim):
            np.logical_and(
                valid, lcoords[:, j][None, :] < bounds[j] - rows[:, j][:, None], out=valid
            )
        offs = rows @ strides
        pieces.append((lflat[None, :] + offs[:, None])[valid])
    flat = np.concatenate(pieces) if pieces else np.empty(0, dtype=np.int64)
    if assert_direct:
        uniq, cnt = np.unique(flat, return_counts=True)
        if (cnt > 1).any():
            culprit = tuple(
                int(c) for c in _unflat(uniq[cnt > 1][:1].astype(np.int64), out_box)[0]
            )
            raise StructureError(f"sum is not direct: point {culprit} produced twice")
        flat = uniq
    else:
        flat = np.unique(flat)
    coords = _unflat(flat, out_box)
    coords.setflags(write=False)
    return BoxSet(out_box, coords)


def staircase_set(a, b: Box) -> BoxSet:
    """The staircase complement {z : some z_j < a_j}, truncated to b.

    This is the set of points not reachable by translating the full orthant
    by a; together with the ray of multiples of a it tiles the orthant.
    Requires every a_j >= 1.
    """
    a = tuple(int(x) for x in a)
    if len(a) != b.dim:
        raise ValueError("dimension mismatch")
    if any(x < 1 for x in a):
        raise ValueError(f"staircase corner must have all coordinates >= 1: {a}")
    if b.volume > _ENUM_LIMIT:
        raise ValueError("box too large to enumerate staircase set")
    all_flat = np.arange(b.volume, dtype=np.int64)
    inner = tuple(m - x for m, x in zip(b.bounds, a))
    if any(m <= 0 for m in inner):
        coords = _unflat(all_flat, b)
    else:
        inner_box = Box(inner)
        shifted = _unflat(np.arange(inner_box.volume, dtype=np.int64), inner_box) + np.asarray(
            a, dtype=np.int64
        )
        coords = _unflat(np.setdiff1d(all_flat, _flat(shifted, b)), b)
    coords.setflags(write=False)
    return BoxSet(b, coords)


def cartesian(a: BoxSet, b: BoxSet) -> BoxSet:
    """Cartesian product A x B, complete on the product box."""
    out_box = Box(a.box.bounds + b.box.bounds)
    if not len(a) or not len(b):
        return BoxSet.empty(out_box)
    if len(a) * len(b) > _ENUM_LIMIT:
        raise ValueError("cartesian product too large to materialise")
    left = np.repeat(a.coords, len(b), axis=0)
    right = np.tile(b.coords, (len(a), 1))
    return BoxSet.from_coords(np.hstack([left, right]), out_box)


def project_face(a: BoxSet, axes) -> BoxSet:
    """Restrict to the face spanned by axes (all other coordinates zero),
    then drop the zero coordinates.  Axes keep their relative order."""
    axes = tuple(int(j) for j in axes)
    if len(set(axes)) != len(axes) or any(j < 0 or j >= a.dim for j in axes):
        raise ValueError(f"invalid axis subset {axes} for dimension {a.dim}")
    others = [j for j in range(a.dim) if j not in axes]
    if not others:
        return a
    keep = (a.coords[:, others] == 0).all(axis=1) if len(a) else np.zeros(0, dtype=bool)
    out_box = Box(tuple(a.box.bounds[j] for j in axes))
    return BoxSet.from_coords(a.coords[keep][:, axes], out_box)


def axis_section(a: BoxSet, axis: int) -> BoxSet:
    """One-dimensional section along a coordinate ray: {t : t*e_axis in A}."""
    return project_face(a, (axis,))


def scale_line(a: BoxSet, vector) -> BoxSet:
    """Image of a one-dimensional set under k -> k * vector."""
    if a.dim != 1:
        raise ValueError("scale_line expects a one-dimensional set")
    vec = np.asarray([int(x) for x in vector], dtype=np.int64)
    if (vec < 0).any() or not vec.any():
        raise ValueError(f"direction must be nonzero and nonnegative: {tuple(vector)}")
    m = a.box.bounds[0]
    out_box = Box(tuple(int(v) * m if v else 1 for v in vec))
    coords = a.coords.reshape(-1, 1) * vec[None, :]
    return BoxSet.from_coords(coords, out_box)


def shift(a: BoxSet, vector) -> BoxSet:
    """Translate by a nonnegative vector; the box grows by the same amount."""
    vec = np.asarray([int(x) for x in vector], dtype=np.int64)
    if len(vec) != a.dim or (vec < 0).any():
        raise ValueError("shift vector must be nonnegative and match dimension")
    out_box = Box(tuple(m + int(v) for m, v in zip(a.box.bounds, vec)))
    return BoxSet.from_coords(a.coords + vec[None, :], out_box)


def dilate_axis(a: BoxSet, axis: int, factor: int) -> BoxSet:
    """Multiply one coordinate by a positive factor."""
    factor = int(factor)
    if factor < 1:
        raise ValueError("dilation factor must be >= 1")
    if not 0 <= axis < a.dim:
        raise ValueError(f"axis {axis} out of range")
    if a.box.bounds[axis] * factor >= _MAX_VOLUME:
        raise ValueError("dilation would overflow exact index arithmetic")
    coords = a.coords.copy()
    coords[:, axis] *= factor
    out_box = Box(
        tuple(m * factor if j == axis else m for j, m in enumerate(a.box.bounds))
    )
    return BoxSet.from_coords(coords, out_box)


def permute_axes(a: BoxSet, perm) -> BoxSet:
    """Reorder coordinates: output axis i is input axis perm[i]."""
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(a.dim)):
        raise ValueError(f"not a permutation of axes: {perm}")
    out_box = Box(tuple(a.box.bounds[p] for p in perm))
    return BoxSet.from_coords(a.coords[:, perm], out_box)


# ---------------------------------------------------------------------------
# Point-set dump format.
#
#   dim n
#   box M1 ... Mn
#   <one point per line, space-separated, lexicographically sorted>
# ---------------------------------------------------------------------------


def write_points(a: BoxSet) -> str:
    lines = [f"dim {a.dim}", "box " + " ".join(str(m) for m in a.box.bounds)]
    lines.extend(" ".join(str(int(c)) for c in row) for row in a.coords)
    return "\n".join(lines) + "\n"


def read_points(text: str) -> BoxSet:
    from .errors import ParseError

    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2 or not lines[0].startswith("dim ") or not lines[1].startswith("box "):
        raise ParseError("point dump must start with 'dim n' and 'box M1 ... Mn' lines")
    try:
        dim = int(lines[0].split()[1])
        bounds = tuple(int(tok) for tok in lines[1].split()[1:])
        pts = [tuple(int(tok) for tok in ln.split()) for ln in lines[2:]]
    except ValueError as exc:
        raise ParseError(f"bad integer in point dump: {exc}") from None
    if len(bounds) != dim:
        raise ParseError(f"box has {len(bounds)} bounds but dim is {dim}")
    if any(len(p) != dim for p in pts):
        raise ParseError("point with wrong number of coordinates")
    try:
        return BoxSet.from_points(pts, Box(bounds))
    except ValueError as exc:
        raise ParseError(str(exc)) from None
