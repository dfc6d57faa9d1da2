"""One-dimensional complementing pairs and mixed-radix numeration.

Fix radices (n_1, ..., n_L), each >= 2.  Every t with 0 <= t < n_1*...*n_L
has a unique digit expansion

    t = d_1 + n_1 d_2 + (n_1 n_2) d_3 + ... + (n_1 ... n_{L-1}) d_L,

with 0 <= d_j < n_j.  A pair (T, S) of subsets of the nonnegative integers
with T (+) S = Z>=0 is always, up to truncation, a split of digit positions:
T collects the numbers whose digits vanish at odd positions and S those
vanishing at even positions, or the other way round (de Bruijn).  NPairSpec
captures this symbolically:

* parity records which side owns the even digit positions;
* infinite_tail=True means the radix list is a prefix of an infinite
  sequence, continued with constant radix 2 for evaluation;
* infinite_tail=False means the expansion stops: one side is the finite
  digit set below n_1*...*n_L, and the side owning position L+1 absorbs an
  unbounded final digit, i.e. all multiples of n_1*...*n_L.  The trivial
  pairs ({0}, all) and (all, {0}) are the degenerate case of an empty radix
  list.

fit_npair inverts evaluation by greedy peeling: repeatedly divide the side
not containing 1 by its least positive element, which must absorb an initial
interval on the other side.  Every peel is verified exactly within the box,
so the recovered spec reproduces the input sets on the whole input box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, StructureError, ValidationError
from .lattice_sets import Box, BoxSet

PARITIES = ("T-even", "T-odd")


def radix_encode(t: int, radices) -> tuple[int, ...]:
    """Digits of t, least significant first; requires t < prod(radices)."""
    radices = tuple(int(n) for n in radices)
    if any(n < 2 for n in radices):
        raise ValueError(f"all radices must be >= 2: {radices}")
    t = int(t)
    if t < 0 or t >= math.prod(radices):
        raise ValueError(f"{t} outside representable range [0, {math.prod(radices)})")
    digits = []
    for n in radices:
        t, d = divmod(t, n)
        digits.append(d)
    return tuple(digits)


def radix_decode(digits, radices) -> int:
    """Inverse of radix_encode: d_1 + n_1 d_2 + (n_1 n_2) d_3 + ..."""
    radices = tuple(int(n) for n in radices)
    digits = tuple(int(d) for d in digits)
    if len(digits) != len(radices):
        raise ValueError("digit list and radix list must have equal length")
    t, weight = 0, 1
    for d, n in zip(digits, radices):
        if n < 2:
            raise ValueError(f"all radices must be >= 2: {radices}")
        if not 0 <= d < n:
            raise ValueError(f"digit {d} out of range for radix {n}")
        t += d * weight
        weight *= n
    return t


@dataclass(frozen=True)
class NPairSpec:
    """Symbolic description of a pair tiling the nonnegative integers."""

    radices: tuple[int, ...] = ()
    infinite_tail: bool = True
    parity: str = "T-even"

    def __post_init__(self):
        object.__setattr__(self, "radices", tuple(int(n) for n in self.radices))
        if any(n < 2 for n in self.radices):
            raise ValidationError(f"all radices must be >= 2: {self.radices}")
        if self.parity not in PARITIES:
            raise ValidationError(f"parity must be one of {PARITIES}")
        if self.infinite_tail and not self.radices:
            # Canonical all-twos pair; keep it representable but explicit.
            pass

    @classmethod
    def zero_t(cls) -> "NPairSpec":
        """The trivial pair ({0}, everything)."""
        return cls((), False, "T-even")

    @classmethod
    def zero_s(cls) -> "NPairSpec":
        """The trivial pair (everything, {0})."""
        return cls((), False, "T-odd")

    def t_owns(self, position: int) -> bool:
        """Does the T side own digit position `position` (1-based)?"""
        even = position % 2 == 0
        return even if self.parity == "T-even" else not even

    @property
    def special(self) -> str | None:
        if self.radices or self.infinite_tail:
            return None
        return "zero-T" if self.parity == "T-even" else "zero-S"

    @property
    def finite_side(self) -> str | None:
        """Which side is a finite set, or None when both are infinite."""
        if self.infinite_tail:
            return None
        tail_pos = len(self.radices) + 1
        return "S" if self.t_owns(tail_pos) else "T"

    def side_positions(self, side: str, bound: int) -> list[tuple[int, int | None]]:
        """(weight, radix) per digit position owned by `side`, up to bound.

        A radix of None marks the unbounded final digit of a stopped list.
        """
        out = []
        weight, pos = 1, 1
        radices = list(self.radices)
        while weight < bound:
            if pos <= len(radices):
                radix = radices[pos - 1]
            elif self.infinite_tail:
                radix = 2
            else:
                radix = None
            owner_t = self.t_owns(pos)
            if (side == "T") == owner_t:
                out.append((weight, radix))
            if radix is None:
                break
            weight *= radix
            pos += 1
        return out


def format_npair_spec(spec: NPairSpec) -> str:
    if spec.special is not None:
        return f"special={spec.special}"
    radices = ",".join(str(n) for n in spec.radices)
    tail = "yes" if spec.infinite_tail else "no"
    return f"radices {radices} tail={tail} parity={spec.parity}"


def parse_npair_spec(text: str) -> NPairSpec:
    text = text.strip()
    if text.startswith("special="):
        name = text.split("=", 1)[1].strip()
        if name == "zero-T":
            return NPairSpec.zero_t()
        if name == "zero-S":
            return NPairSpec.zero_s()
        raise ParseError(f"unknown special pair {name!r}")
    toks = text.split()
    if not toks or toks[0] != "radices":
        raise ParseError(f"cannot parse pair spec {text!r}")
    try:
        radices = tuple(int(x) for x in toks[1].split(",") if x) if len(toks) > 1 else ()
    except ValueError:
        raise ParseError(f"bad radix list in {text!r}") from None
    opts = dict(tok.split("=", 1) for tok in toks[2:] if "=" in tok)
    tail = opts.get("tail", "yes")
    parity = opts.get("parity", "T-even")
    if tail not in ("yes", "no"):
        raise ParseError(f"tail must be yes or no, got {tail!r}")
    if parity not in PARITIES:
        raise ParseError(f"parity must be one of {PARITIES}, got {parity!r}")
    try:
        return NPairSpec(radices, tail == "yes", parity)
    except ValidationError as exc:
        raise ParseError(str(exc)) from None


def _side_values(spec: NPairSpec, side: str, bound: int) -> np.ndarray:
    vals = np.zeros(1, dtype=np.int64)
    for weight, radix in spec.side_positions(side, bound):
        dmax = -(-bound // weight)  # ceil
        if radix is not None:
            dmax = min(dmax, radix)
        digits = np.arange(dmax, dtype=np.int64) * weight
        vals = (vals[:, None] + digits[None, :]).ravel()
        vals = vals[vals < bound]
    return np.sort(vals)


def evaluate_npair(spec: NPairSpec, b: Box | int) -> tuple[BoxSet, BoxSet]:
    """Expand a spec into explicit one-dimensional sets on [0, bound)."""
    b = b if isinstance(b, Box) else Box((int(b),))
    if b.dim != 1:
        raise ValueError("pair specs evaluate to one-dimensional sets")
    bound = b.bounds[0]
    t = BoxSet.from_coords(_side_values(spec, "T", bound).reshape(-1, 1), b)
    s = BoxSet.from_coords(_side_values(spec, "S", bound).reshape(-1, 1), b)
    return t, s


@dataclass(frozen=True)
class FitResult:
    """Outcome of fitting a spec to box data.

    The spec reproduces the input sets exactly on [0, certified_bound) --
    every peeling step is verified on the data.  Radices beyond
    certified_radices describe the data but could differ for the underlying
    infinite sets: radix k is trusted only when the box reaches twice the
    digit weight it governs.
    """

    spec: NPairSpec
    certified_bound: int
    certified_radices: int


def fit_npair(t: BoxSet, s: BoxSet) -> FitResult:
    """Recover a symbolic spec from a box-verified one-dimensional pair."""
    if t.dim != 1 or s.dim != 1:
        raise ValueError("fit_npair expects one-dimensional sets")
    bound = min(t.box.bounds[0], s.box.bounds[0])
    t_vals = t.coords[:, 0][t.coords[:, 0] < bound]
    s_vals = s.coords[:, 0][s.coords[:, 0] < bound]
    if 0 not in t_vals or 0 not in s_vals:
        raise StructureError("both sides of a pair must contain 0")

    radices: list[int] = []
    # parity of the first peel decides the orientation; resolved when known
    first_owner: str | None = None  # side owning digit position 1
    cur_t, cur_s, m = t_vals, s_vals, bound
    while m >= 2:
        t_trivial = len(cur_t) == 1
        s_trivial = len(cur_s) == 1
        if t_trivial and s_trivial:
            raise StructureError("1 is covered by neither side")
        if t_trivial or s_trivial:
            interval_side = cur_s if t_trivial else cur_t
            if not np.array_equal(interval_side, np.arange(m)):
                raise StructureError("side opposite a trivial side must fill the box")
            # A remainder of width >= 4 refutes any continued alternation
            # within the box (the trivial side would resume within twice the
            # next digit weight), so the full side owns the tail outright.
            # Narrower remainders read as one more alternating digit.
            if first_owner is not None and m < 4:
                radices.append(int(m))
            break
        in_t = 1 in cur_t
        in_s = 1 in cur_s
        if in_t == in_s:
            raise StructureError("exactly one side must contain 1")
        interval_side, other = (cur_t, cur_s) if in_t else (cur_s, cur_t)
        nz = other[other > 0]
        p = int(nz[0])
        if p < 2:
            raise StructureError("peeled radix must be >= 2")
        if (other % p).any():
            raise StructureError(f"side opposite {p} has an element not divisible by {p}")
        rest = np.unique(interval_side // p)
        # exact reconstruction of the interval side within the box
        recon = (rest[:, None] * p + np.arange(p)[None, :]).ravel()
        recon = np.unique(recon[recon < m])
        if not np.array_equal(recon, interval_side):
            raise StructureError("interval peel does not reconstruct the data")
        if first_owner is None:
            first_owner = "T" if in_t else "S"
        radices.append(p)
        m //= p
        new_interval = rest[rest < m]
        new_other = (other // p)[other // p < m]
        # the divided side keeps the tiles' roles: T stays T
        if in_t:
            cur_t, cur_s = new_interval, new_other
        else:
            cur_t, cur_s = new_other, new_interval

    if first_owner is None:
        # no peel happened: one side trivial from the start
        first_owner = "S" if len(t_vals) == 1 else "T"
        tail = False
        parity = "T-even" if first_owner == "S" else "T-odd"
        spec = NPairSpec((), tail, parity)
    else:
        parity = "T-odd" if first_owner == "T" else "T-even"
        spec = NPairSpec(tuple(radices), False, parity)

    certified = 0
    prod = 1
    for n in spec.radices:
        prod *= n
        if 2 * prod <= bound:
            certified += 1
    return FitResult(spec, bound, certified)


# ---------------------------------------------------------------------------
# Interval pairs: (C, D) with C (+) D = {0, ..., N-1}.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntervalPair:
    c: tuple[int, ...]
    d: tuple[int, ...]

    def __post_init__(self):
        c = tuple(sorted(int(x) for x in self.c))
        d = tuple(sorted(int(x) for x in self.d))
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)
        if not c or not d or c[0] != 0 or d[0] != 0:
            raise ValidationError("both sides of an interval pair must contain 0")
        n = len(c) * len(d)
        sums = np.sort(
            (np.asarray(c, dtype=np.int64)[:, None] + np.asarray(d, dtype=np.int64)[None, :]).ravel()
        )
        if not np.array_equal(sums, np.arange(n)):
            raise ValidationError(f"C={c} D={d} do not tile an initial interval")

    @property
    def size(self) -> int:
        return len(self.c) * len(self.d)

    @classmethod
    def trivial(cls) -> "IntervalPair":
        return cls((0,), (0,))

    @classmethod
    def from_radices(cls, radices, parity: str = "C-even") -> "IntervalPair":
        """Digit-position split of {0, ..., prod(radices) - 1}.

        parity names the side owning the even digit positions.
        """
        radices = tuple(int(n) for n in radices)
        if parity not in ("C-even", "C-odd"):
            raise ValidationError("interval parity must be C-even or C-odd")
        c_vals, d_vals = [0], [0]
        weight = 1
        for pos, n in enumerate(radices, start=1):
            if n < 2:
                raise ValidationError(f"all radices must be >= 2: {radices}")
            even = pos % 2 == 0
            c_owns = even if parity == "C-even" else not even
            target = c_vals if c_owns else d_vals
            target[:] = [v + d * weight for v in target for d in range(n)]
            weight *= n
        return cls(tuple(c_vals), tuple(d_vals))

    @property
    def is_trivial(self) -> bool:
        return self.size == 1

    def swap(self) -> "IntervalPair":
        return IntervalPair(self.d, self.c)


def factor_interval_pair(pair: IntervalPair) -> list[tuple[int, str]]:
    """Peel an interval pair into its chain of elementary splits.

    Each chain entry (p, side) says: `side` holds a full digit interval
    {0,...,p-1} at that level while the other side is divisible by p.
    Sides alternate strictly after the first entry; re-expanding the chain
    with expand_interval_chain reproduces the pair exactly.
    """
    chain: list[tuple[int, str]] = []
    c = np.asarray(pair.c, dtype=np.int64)
    d = np.asarray(pair.d, dtype=np.int64)
    n = pair.size
    while n > 1:
        in_c = 1 in c
        interval, other = (c, d) if in_c else (d, c)
        side = "C" if in_c else "D"
        nz = other[other > 0]
        p = int(nz[0]) if len(nz) else int(n)
        if n % p or (other % p).any():
            raise StructureError("not an interval pair: bad divisibility during peel")
        if not np.array_equal(interval[:p], np.arange(p)):
            raise StructureError(f"side {side} does not start with the interval [0, {p})")
        rest = np.unique(interval // p)
        if len(rest) * p != len(interval):
            raise StructureError("interval side does not factor through the peel")
        chain.append((p, side))
        c, d = (rest, other // p) if in_c else (other // p, rest)
        n //= p
    return chain


def expand_interval_chain(chain) -> IntervalPair:
    """Rebuild an interval pair from its factorization chain."""
    c, d = [0], [0]
    weight = 1
    for p, side in chain:
        p = int(p)
        if p < 2:
            raise ValueError("chain radices must be >= 2")
        target = c if side == "C" else d
        target[:] = [v + k * weight for v in target for k in range(p)]
        weight *= p
    return IntervalPair(tuple(c), tuple(d))


# ---------------------------------------------------------------------------
# Interval chains of a full pair: nested interval pairs C_k | T, D_k | S.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainLevel:
    pair: IntervalPair
    t_residue: BoxSet  # A_k: T = C_k (+) N_k A_k within the box
    s_residue: BoxSet  # B_k


@dataclass(frozen=True)
class IntervalChain:
    """Nested interval approximations of a one-dimensional pair.

    For a tiling (one side finite), `finite` carries the tile side, the
    minimal interval size N with tile (+) D = {0,...,N-1}, and D; the other
    side is then D (+) N * (all nonnegative integers).  Otherwise `levels`
    lists the increasing interval pairs cut at each certified digit weight.
    """

    kind: str  # "finite" | "infinite"
    levels: tuple[ChainLevel, ...] = ()
    finite_side: str | None = None
    size: int | None = None
    d: tuple[int, ...] | None = None


def minimal_tile_cover(spec: NPairSpec) -> int:
    """Smallest N with tile (+) D = {0, ..., N-1} for a stopped spec."""
    fin = spec.finite_side
    if fin is None:
        raise ValueError("spec has no finite side")
    last = 0
    for pos in range(1, len(spec.radices) + 1):
        if spec.t_owns(pos) == (fin == "T"):
            last = pos
    return math.prod(spec.radices[:last])


def interval_chain(t: BoxSet, s: BoxSet) -> IntervalChain:
    fit = fit_npair(t, s)
    spec = fit.spec
    bound = fit.certified_bound

    fin = spec.finite_side
    if fin is not None:
        n = minimal_tile_cover(spec)
        # finite presentation only when the box certifies a full extra period
        if 2 * n <= bound:
            tile, other = (t, s) if fin == "T" else (s, t)
            tile_vals = tile.coords[:, 0][tile.coords[:, 0] < bound]
            if tile_vals.max(initial=0) >= n:
                raise StructureError("tile has elements beyond its covering interval")
            d_vals = tuple(int(v) for v in other.coords[:, 0] if v < n)
            # tile (+) d must give the interval, and the other side must be
            # d shifted by every visible multiple of n
            IntervalPair(tuple(int(v) for v in tile_vals), d_vals)
            expect = np.asarray(
                sorted(
                    d + n * q for d in d_vals for q in range(-(-bound // n)) if d + n * q < bound
                ),
                dtype=np.int64,
            )
            if not np.array_equal(expect, other.coords[:, 0][other.coords[:, 0] < bound]):
                raise StructureError("growing side is not periodic above the tile's interval")
            return IntervalChain("finite", (), fin, n, d_vals)

    levels = []
    prod = 1
    for radix in spec.radices:
        prod *= radix
        if prod > bound:
            break
        c_k = tuple(int(v) for v in t.coords[:, 0] if v < prod)
        d_k = tuple(int(v) for v in s.coords[:, 0] if v < prod)
        pair = IntervalPair(c_k, d_k)
        res_bound = max(1, bound // prod)
        a_k = np.unique(t.coords[:, 0][t.coords[:, 0] % prod == 0] // prod)
        b_k = np.unique(s.coords[:, 0][s.coords[:, 0] % prod == 0] // prod)
        a_set = BoxSet.from_coords(a_k[a_k < res_bound].reshape(-1, 1), Box((res_bound,)))
        b_set = BoxSet.from_coords(b_k[b_k < res_bound].reshape(-1, 1), Box((res_bound,)))
        levels.append(ChainLevel(pair, a_set, b_set))
    return IntervalChain("infinite", tuple(levels))


def compose_interval_prefix(spec: NPairSpec, pair: IntervalPair) -> NPairSpec:
    """Spec of (C (+) N*T, D (+) N*S) given the spec of (T, S).

    Grafting an interval pair of size N below an existing pair prepends the
    pair's factorization chain to the digit positions; adjacent positions
    owned by the same side merge into a single digit of the product radix.
    """
    chain = factor_interval_pair(pair)
    if not chain:
        return spec
    positions: list[tuple[int | None, str]] = [
        (p, "T" if side == "C" else "S") for p, side in chain
    ]
    for pos, n in enumerate(spec.radices, start=1):
        positions.append((n, "T" if spec.t_owns(pos) else "S"))
    if not spec.infinite_tail:
        tail_pos = len(spec.radices) + 1
        positions.append((None, "T" if spec.t_owns(tail_pos) else "S"))
    merged: list[tuple[int | None, str]] = []
    for radix, owner in positions:
        if merged and merged[-1][1] == owner:
            prev = merged[-1][0]
            merged[-1] = (None if radix is None or prev is None else prev * radix, owner)
        else:
            merged.append((radix, owner))
    parity = "T-odd" if merged[0][1] == "T" else "T-even"
    if merged[-1][0] is None:
        return NPairSpec(tuple(r for r, _ in merged[:-1]), False, parity)
    if not spec.infinite_tail:
        raise StructureError("stopped spec lost its unbounded tail during merge")
    return NPairSpec(tuple(r for r, _ in merged), True, parity)
