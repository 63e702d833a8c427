"""Tensor-rank machinery: flattenings, exact rank, bounds, and rate calculators.

Flattening a state across a bipartition lower-bounds its tensor rank; those
ranks are computed by fraction-free integer elimination, with a numeric SVD
path only for float-valued states.  On 2x2x2 states the quartic invariant
plus the three flattening ranks pin the exact tensor rank; a bounded-norm
least-squares fit is available as a falsification aid only, because rank-3
qubit tensors admit arbitrarily good rank-2 fits once factors may diverge.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb, gcd, inf, log2, prod

import numpy as np

from .states import DEFAULT_ENTRY_CAP, DickeSpec, PureState, SizeCapError, build_dicke, word_to_label
from .slocc import LocalOperator


@dataclass(frozen=True)
class Bipartition:
    """Split of party indices into a left and right block."""

    left: tuple[int, ...]
    right: tuple[int, ...]

    @classmethod
    def of(cls, left, num_parties: int) -> "Bipartition":
        left = tuple(sorted(set(int(p) for p in left)))
        if not left:
            raise ValueError("left block must be nonempty")
        if any(p < 0 or p >= num_parties for p in left):
            raise ValueError("party index out of range")
        right = tuple(p for p in range(num_parties) if p not in left)
        if not right:
            raise ValueError("right block must be nonempty")
        return cls(left, right)

    @classmethod
    def half(cls, num_parties: int) -> "Bipartition":
        """First floor(N/2) parties against the rest."""
        return cls.of(range(num_parties // 2), num_parties)

    def key(self) -> str:
        return ",".join(map(str, self.left)) + "|" + ",".join(map(str, self.right))


def all_bipartitions(num_parties: int) -> list[Bipartition]:
    """Every bipartition, canonically listed with party 0 on the left."""
    cuts = []
    others = range(1, num_parties)
    for r in range(num_parties - 1):
        for extra in itertools.combinations(others, r):
            cuts.append(Bipartition.of((0,) + extra, num_parties))
    return cuts


@dataclass
class SparseMatrix:
    rows: int
    cols: int
    entries: dict

    def to_dense(self) -> list[list]:
        dense = [[0] * self.cols for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            dense[r][c] = v
        return dense

    def num_nonzero(self) -> int:
        return len(self.entries)


def _mixed_radix(idx, parties, dims) -> int:
    out = 0
    for p in parties:
        out = out * dims[p] + idx[p]
    return out


def flatten(state: PureState, cut: Bipartition, cell_cap: int = DEFAULT_ENTRY_CAP) -> SparseMatrix:
    """Matrix of the state across a bipartition: rows = left block indices."""
    dims = state.local_dims
    seen = set(cut.left) | set(cut.right)
    if seen != set(range(state.num_parties)) or len(cut.left) + len(cut.right) != state.num_parties:
        raise ValueError("bipartition does not match the state's parties")
    nrows = prod(dims[p] for p in cut.left)
    ncols = prod(dims[p] for p in cut.right)
    if nrows * ncols > cell_cap:
        raise SizeCapError("flattening", nrows * ncols, cell_cap)
    entries = {}
    for idx, amp in state.amps.items():
        entries[(_mixed_radix(idx, cut.left, dims), _mixed_radix(idx, cut.right, dims))] = amp
    return SparseMatrix(nrows, ncols, entries)


def _dense_rows(matrix):
    if isinstance(matrix, SparseMatrix):
        return matrix.to_dense()
    return [list(row) for row in matrix]


def rank_exact(matrix) -> int:
    """Rank by fraction-free (Bareiss) elimination over the integers.

    Accepts integer or rational entries; rows are cleared of denominators
    first, so every division during elimination is exact and no tolerance
    enters anywhere.
    """
    rows = _dense_rows(matrix)
    if not rows or not rows[0]:
        return 0
    scaled = []
    for row in rows:
        lcm = 1
        for v in row:
            if isinstance(v, Fraction):
                lcm = lcm * v.denominator // gcd(lcm, v.denominator)
            elif not isinstance(v, int):
                raise TypeError("rank_exact needs integer or rational entries")
        scaled.append([int(v * lcm) for v in row])
    m, n = len(scaled), len(scaled[0])
    rank = 0
    prev = 1
    for c in range(n):
        pivot = next((r for r in range(rank, m) if scaled[r][c] != 0), None)
        if pivot is None:
            continue
        scaled[rank], scaled[pivot] = scaled[pivot], scaled[rank]
        lead = scaled[rank][c]
        for r in range(rank + 1, m):
            factor = scaled[r][c]
            row_r = scaled[r]
            row_p = scaled[rank]
            for j in range(c + 1, n):
                row_r[j] = (row_r[j] * lead - factor * row_p[j]) // prev
            row_r[c] = 0
        prev = lead
        rank += 1
        if rank == m:
            break
    return rank


def rank_numeric(matrix, rel_tol: float = 1e-8) -> int:
    """Rank as the number of singular values above rel_tol x the largest."""
    dense = np.array(_dense_rows(matrix), dtype=complex)
    if dense.size == 0:
        return 0
    sv = np.linalg.svd(dense, compute_uv=False)
    if len(sv) == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > rel_tol * sv[0]))


def flattening_rank(state: PureState, cut: Bipartition, cell_cap: int = DEFAULT_ENTRY_CAP) -> int:
    mat = flatten(state, cut, cell_cap=cell_cap)
    if state.is_exact:
        return rank_exact(mat)
    return rank_numeric(mat)


# -- exact 2x2x2 classification ------------------------------------------------

def _amp222(state: PureState):
    if state.local_dims != (2, 2, 2):
        raise ValueError("expected a three-qubit state")
    return {idx: state.amps.get(idx, 0) for idx in itertools.product((0, 1), repeat=3)}


def hyperdeterminant_222(state: PureState):
    """Cayley's quartic invariant of the eight amplitudes, exactly."""
    if not state.is_exact:
        raise ValueError("exact backend required")
    a = _amp222(state)
    sq = (
        a[0, 0, 0] ** 2 * a[1, 1, 1] ** 2
        + a[0, 0, 1] ** 2 * a[1, 1, 0] ** 2
        + a[0, 1, 0] ** 2 * a[1, 0, 1] ** 2
        + a[1, 0, 0] ** 2 * a[0, 1, 1] ** 2
    )
    cross = (
        a[0, 0, 0] * a[0, 0, 1] * a[1, 1, 0] * a[1, 1, 1]
        + a[0, 0, 0] * a[0, 1, 0] * a[1, 0, 1] * a[1, 1, 1]
        + a[0, 0, 0] * a[0, 1, 1] * a[1, 0, 0] * a[1, 1, 1]
        + a[0, 0, 1] * a[0, 1, 0] * a[1, 0, 1] * a[1, 1, 0]
        + a[0, 0, 1] * a[0, 1, 1] * a[1, 0, 0] * a[1, 1, 0]
        + a[0, 1, 0] * a[0, 1, 1] * a[1, 0, 0] * a[1, 0, 1]
    )
    quad = (
        a[0, 0, 0] * a[0, 1, 1] * a[1, 0, 1] * a[1, 1, 0]
        + a[0, 0, 1] * a[0, 1, 0] * a[1, 0, 0] * a[1, 1, 1]
    )
    return sq - 2 * cross + 4 * quad


def classify_222(state: PureState) -> int:
    """Exact tensor rank of a three-qubit state: 0, 1, 2, or 3.

    Rank 2 covers both the nondegenerate class (nonzero invariant) and
    entangled-pair-times-factor states; rank 3 is the degenerate genuinely
    tripartite class with all single-party flattenings full.
    """
    if not state.is_exact:
        raise ValueError("exact backend required")
    if state.is_zero():
        return 0
    ranks = [
        rank_exact(flatten(state, Bipartition.of([p], 3)))
        for p in range(3)
    ]
    if all(r <= 1 for r in ranks):
        return 1
    if hyperdeterminant_222(state) != 0 or any(r == 1 for r in ranks):
        return 2
    return 3


def rank2_fit_residual(
    state: PureState,
    factor_cap: float = 10.0,
    iterations: int = 400,
    seed: int = 0,
) -> float:
    """Frobenius residual of a bounded-norm rank-2 alternating fit.

    Factor columns are clamped to ``factor_cap`` after every update, which
    keeps degenerate rank-3 tensors bounded away from zero residual.  The
    number is evidence for falsification only, never a rank certificate.
    """
    if state.local_dims != (2, 2, 2):
        raise ValueError("expected a three-qubit state")
    dense = np.zeros((2, 2, 2))
    for idx, amp in state.amps.items():
        dense[idx] = float(amp)
    rng = np.random.default_rng(seed)
    factors = [rng.standard_normal((2, 2)) for _ in range(3)]

    def clamp(mat):
        norms = np.linalg.norm(mat, axis=0)
        over = norms > factor_cap
        mat[:, over] *= factor_cap / norms[over]
        return mat

    unfoldings = [dense.reshape(2, 4), dense.transpose(1, 0, 2).reshape(2, 4), dense.transpose(2, 0, 1).reshape(2, 4)]
    for _ in range(iterations):
        for mode in range(3):
            others = [factors[m] for m in range(3) if m != mode]
            # Khatri-Rao product of the other two factor matrices
            kr = np.einsum("ir,jr->ijr", others[0], others[1]).reshape(4, 2)
            sol, *_ = np.linalg.lstsq(kr, unfoldings[mode].T, rcond=None)
            factors[mode] = clamp(sol.T)
    approx = np.einsum("ir,jr,kr->ijk", *factors)
    return float(np.linalg.norm(approx - dense))


# -- bound and rate calculators --------------------------------------------------

def w_power_rank_lower(num_parties: int, n: int) -> int:
    """Flattening-based lower bound (N-1)*2^n - N + 2 on the W power's rank."""
    if num_parties < 2 or n < 1:
        raise ValueError("need num_parties >= 2 and n >= 1")
    return (num_parties - 1) * 2 ** n - num_parties + 2


def dicke_split_count(spec: DickeSpec, r: int) -> int:
    """Number of ways to put r letters on the left: |{beta, 0<=beta_i<=j_i, sum=r}|."""
    if not 0 <= r <= spec.num_parties:
        raise ValueError("split size out of range")
    ways = [1] + [0] * r
    for j in spec.multiplicities:
        new = [0] * (r + 1)
        for s, w in enumerate(ways):
            if w:
                for b in range(min(j, r - s) + 1):
                    new[s + b] += w
        ways = new
    return ways[r]


def sorting_map(block_size: int, num_symbols: int) -> LocalOperator:
    """Operator sending each word of a grouped block to its sorted form.

    Acting on one side of a flattening it merges columns with equal symbol
    content, which preserves the rank of symmetrized-word flattenings.
    """
    size = num_symbols ** block_size
    entries = {}
    for word in itertools.product(range(1, num_symbols + 1), repeat=block_size):
        col = word_to_label(word, num_symbols)
        row = word_to_label(tuple(sorted(word)), num_symbols)
        entries[(row, col)] = 1
    return LocalOperator(size, size, entries=entries)


class TightnessConditionError(ValueError):
    """The spec does not satisfy the condition under which the bound is tight."""


@dataclass
class TightBoundReport:
    spec: DickeSpec
    split_size: int
    flattening_rank: int
    split_count: int
    product_bound: int
    sum_condition: bool
    product_condition: bool
    passed: bool

    def to_dict(self) -> dict:
        return {
            "spec": list(self.spec.multiplicities),
            "split_size": self.split_size,
            "flattening_rank": self.flattening_rank,
            "split_count": self.split_count,
            "product_bound": self.product_bound,
            "sum_condition": self.sum_condition,
            "product_condition": self.product_condition,
            "pass": self.passed,
        }


def verify_tight_bound(spec: DickeSpec, entry_cap: int = DEFAULT_ENTRY_CAP) -> TightBoundReport:
    """Check the middle-cut flattening rank equals prod(j_i + 1) over i >= 2.

    Only claimed when the largest multiplicity dominates the sum of the
    rest; both that condition and the stricter product form are reported.
    """
    mults = spec.multiplicities
    tail = mults[1:]
    sum_condition = mults[0] >= sum(tail)
    product_condition = mults[0] >= prod(j + 1 for j in tail)
    if not sum_condition:
        raise TightnessConditionError(
            f"tightness needs the leading multiplicity {mults[0]} to be at least "
            f"the sum of the others ({sum(tail)}); the bound is not claimed tight here"
        )
    r = spec.num_parties // 2
    state = build_dicke(spec, entry_cap=entry_cap)
    rank = rank_exact(flatten(state, Bipartition.half(spec.num_parties), cell_cap=entry_cap))
    product_bound = prod(j + 1 for j in tail)
    split = dicke_split_count(spec, r)
    return TightBoundReport(
        spec=spec,
        split_size=r,
        flattening_rank=rank,
        split_count=split,
        product_bound=product_bound,
        sum_condition=sum_condition,
        product_condition=product_condition,
        passed=rank == product_bound == split,
    )


def rate_lower_bound(spec: DickeSpec):
    """1 / sum of log2(j_i + 1) over i >= 2; exact Fraction when that sum is integral."""
    denom_product = prod(j + 1 for j in spec.multiplicities[1:])
    if denom_product == 1:
        return inf
    if denom_product & (denom_product - 1) == 0:
        return Fraction(1, denom_product.bit_length() - 1)
    return 1.0 / log2(denom_product)


def copies_needed(n: int, target) -> int:
    """Smallest m with 2^m >= the component-count bound for the n-th power.

    ``target`` is either a party count N (weight-1 target states) or a
    DickeSpec.  Comparison is exact big-integer arithmetic; equality counts.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if isinstance(target, DickeSpec):
        num_parties = target.num_parties
        bound = prod(
            comb(n * j + num_parties - 1, num_parties - 1) * (j + 1) ** n
            for j in target.multiplicities[1:]
        )
    else:
        num_parties = int(target)
        if num_parties < 2:
            raise ValueError("need at least 2 parties")
        bound = comb(n + num_parties - 1, num_parties - 1) * 2 ** n
    return max(bound - 1, 0).bit_length()


@dataclass
class BoundEntry:
    name: str
    value: object
    formula: str

    def to_dict(self) -> dict:
        value = self.value
        if isinstance(value, Fraction):
            value = {"exact": str(value), "float": float(value)}
        return {"name": self.name, "value": value, "formula": self.formula}


@dataclass
class RankReport:
    flattening_ranks: dict
    class_222: int | None
    bounds: list

    @property
    def max_flattening(self) -> int:
        return max(self.flattening_ranks.values(), default=0)

    def to_dict(self) -> dict:
        return {
            "flattening_ranks": {cut.key(): r for cut, r in sorted(self.flattening_ranks.items(), key=lambda kv: kv[0].key())},
            "max_flattening": self.max_flattening,
            "class_222": self.class_222,
            "bounds": [b.to_dict() for b in self.bounds],
        }


def rank_report(state: PureState, cuts=None, classify: bool = False, cell_cap: int = DEFAULT_ENTRY_CAP) -> RankReport:
    """Flattening ranks over the requested cuts, with the 2x2x2 verdict if asked."""
    if cuts is None:
        cuts = all_bipartitions(state.num_parties)
    ranks = {cut: flattening_rank(state, cut, cell_cap=cell_cap) for cut in cuts}
    verdict = None
    if classify and state.local_dims == (2, 2, 2) and state.is_exact:
        verdict = classify_222(state)
    return RankReport(flattening_ranks=ranks, class_222=verdict, bounds=[])
