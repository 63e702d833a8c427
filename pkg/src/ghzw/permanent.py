"""Permanent oracles and the bridge from row-form decompositions to tensors.

A family of per-row linear forms that sums to the permanent of every N x N
matrix is the same thing as a product-state decomposition of the tensor
whose support is the N! permutation words.  Expanding a family back into a
sparse tensor therefore certifies it, and the middle-cut flattening rank of
the permutation tensor, C(N, floor(N/2)), is a hard floor on how many terms
any such family can have.

All arithmetic on this side is exact rational; averages keep their 2^(1-N)
scale as a Fraction rather than folding it into signs.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial, prod

from .states import DEFAULT_ENTRY_CAP, PureState, _check_cap
from .rank import Bipartition, flatten, rank_exact

BRUTE_LIMIT = 9
ORACLE_LIMIT = 20
TENSOR_LIMIT = 7


def _square_rows(matrix):
    rows = [list(row) for row in matrix]
    n = len(rows)
    if n == 0 or any(len(row) != n for row in rows):
        raise ValueError("need a nonempty square matrix")
    return rows, n


def perm_brute(matrix):
    """Permanent by direct permutation enumeration; exact, N <= 9."""
    rows, n = _square_rows(matrix)
    if n > BRUTE_LIMIT:
        raise ValueError(f"brute-force permanent limited to N <= {BRUTE_LIMIT}")
    total = 0
    for sigma in itertools.permutations(range(n)):
        total += prod(rows[i][sigma[i]] for i in range(n))
    return total


def perm_ryser(matrix):
    """Permanent by inclusion-exclusion over column subsets (Gray-code order)."""
    rows, n = _square_rows(matrix)
    if n > ORACLE_LIMIT:
        raise ValueError(f"permanent oracles limited to N <= {ORACLE_LIMIT}")
    sums = [0] * n
    total = 0
    gray = 0
    size = 0
    for k in range(1, 1 << n):
        bit = (k & -k).bit_length() - 1
        if gray & (1 << bit):
            gray ^= 1 << bit
            size -= 1
            for i in range(n):
                sums[i] -= rows[i][bit]
        else:
            gray ^= 1 << bit
            size += 1
            for i in range(n):
                sums[i] += rows[i][bit]
        term = prod(sums)
        total += term if size & 1 else -term
    return total if n & 1 else -total


def perm_glynn(matrix):
    """Permanent as the +-1-vertex average of row-sum products (Gray-code order)."""
    rows, n = _square_rows(matrix)
    if n > ORACLE_LIMIT:
        raise ValueError(f"permanent oracles limited to N <= {ORACLE_LIMIT}")
    sums = [sum(row) for row in rows]
    total = prod(sums)
    gray = 0
    for k in range(1, 1 << (n - 1)):
        bit = (k & -k).bit_length() - 1
        col = bit + 1  # the first column's sign stays +1
        flip = -2 if not gray & (1 << bit) else 2
        gray ^= 1 << bit
        for i in range(n):
            sums[i] += flip * rows[i][col]
        term = prod(sums)
        total += -term if gray.bit_count() & 1 else term
    value = Fraction(total, 1 << (n - 1))
    return int(value) if value.denominator == 1 else value


def permanent_tensor(num_parties: int, entry_cap: int = DEFAULT_ENTRY_CAP) -> PureState:
    """The N-party tensor whose support is the permutation words of 1..N.

    Coefficient-extraction form of the permanent: contracting party i with a
    matrix's row i sums row products over all permutations.  Identical to
    the symmetrized word with every multiplicity 1.
    """
    if num_parties < 1:
        raise ValueError("need at least one party")
    if num_parties > TENSOR_LIMIT:
        raise ValueError(f"permutation tensor limited to N <= {TENSOR_LIMIT}")
    _check_cap("permutation tensor", factorial(num_parties), entry_cap)
    amps = {sigma: 1 for sigma in itertools.permutations(range(num_parties))}
    return PureState([num_parties] * num_parties, amps)


def _as_fraction(value) -> Fraction:
    if isinstance(value, str):
        return Fraction(value)
    return Fraction(value)


@dataclass(frozen=True)
class CoeffFamily:
    """Per-term, per-row linear-form coefficients a[term][row][column].

    Every linear form is homogeneous by construction: there is no constant
    slot to leave nonzero.
    """

    num_parties: int
    coefficients: tuple

    def __post_init__(self):
        n = self.num_parties
        if not self.coefficients:
            raise ValueError("family needs at least one term")
        for term in self.coefficients:
            if len(term) != n or any(len(row) != n for row in term):
                raise ValueError("every term needs N rows of N coefficients")

    @property
    def num_terms(self) -> int:
        return len(self.coefficients)

    @classmethod
    def build(cls, num_parties: int, coefficients) -> "CoeffFamily":
        coeffs = tuple(
            tuple(tuple(_as_fraction(v) for v in row) for row in term)
            for term in coefficients
        )
        return cls(num_parties, coeffs)

    def to_json_dict(self) -> dict:
        return {
            "N": self.num_parties,
            "terms": [
                [[str(Fraction(v)) for v in row] for row in term]
                for term in self.coefficients
            ],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "CoeffFamily":
        return cls.build(int(obj["N"]), obj["terms"])

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def loads(cls, text: str) -> "CoeffFamily":
        return cls.from_json_dict(json.loads(text))


def family_to_tensor(family: CoeffFamily, entry_cap: int = DEFAULT_ENTRY_CAP) -> PureState:
    """Expand sum_j prod_i (sum_k a[j][i][k] |k>) into a sparse state."""
    n = family.num_parties
    out: dict[tuple, Fraction] = {}
    for term in family.coefficients:
        partial: dict[tuple, Fraction] = {(): Fraction(1)}
        for row in term:
            grown: dict[tuple, Fraction] = {}
            for prefix, acc in partial.items():
                for k, coeff in enumerate(row):
                    if coeff == 0:
                        continue
                    grown[prefix + (k,)] = grown.get(prefix + (k,), Fraction(0)) + acc * coeff
            partial = {key: v for key, v in grown.items() if v != 0}
            _check_cap("family expansion", len(partial), entry_cap)
        for key, v in partial.items():
            acc = out.get(key, Fraction(0)) + v
            if acc == 0:
                out.pop(key, None)
            else:
                out[key] = acc
    return PureState([n] * n, out)


def glynn_family(num_parties: int) -> CoeffFamily:
    """The 2^(N-1)-term sign family reconstructing the permutation tensor.

    Term delta (delta_1 = +1) uses row vectors (delta_1, ..., delta_N); its
    sign prod(delta) and the global 2^(1-N) average both fold into the first
    row so the family stays in plain a[term][row][column] form.
    """
    n = num_parties
    if n < 1:
        raise ValueError("need at least one party")
    if n > 12:
        raise ValueError("sign family limited to N <= 12")
    scale = Fraction(1, 1 << (n - 1))
    terms = []
    for signs in itertools.product((1, -1), repeat=n - 1):
        delta = (1,) + signs
        term_sign = prod(delta)
        first = tuple(Fraction(d * term_sign) * scale for d in delta)
        rest = tuple(tuple(Fraction(d) for d in delta) for _ in range(n - 1))
        terms.append((first,) + rest)
    return CoeffFamily(n, tuple(terms))


@dataclass
class LowerBoundReport:
    num_parties: int
    flattening_rank: int
    binomial: int
    passed: bool

    def to_dict(self) -> dict:
        return {
            "N": self.num_parties,
            "flattening_rank": self.flattening_rank,
            "binomial": self.binomial,
            "min_terms": self.flattening_rank,
            "pass": self.passed,
        }


def verify_lower_bound(num_parties: int, entry_cap: int = DEFAULT_ENTRY_CAP) -> LowerBoundReport:
    """Certify the C(N, floor(N/2)) floor by exact middle-cut elimination.

    Any family expanding to the permutation tensor has at least as many
    terms as this rank: each product term contributes rank one across the
    cut.
    """
    if num_parties > 6:
        raise ValueError("exact lower-bound certificate limited to N <= 6")
    tensor = permanent_tensor(num_parties, entry_cap=entry_cap)
    cut = Bipartition.half(num_parties) if num_parties >= 2 else None
    if cut is None:
        rank = 1
    else:
        rank = rank_exact(flatten(tensor, cut, cell_cap=entry_cap))
    expected = comb(num_parties, num_parties // 2)
    return LowerBoundReport(
        num_parties=num_parties,
        flattening_rank=rank,
        binomial=expected,
        passed=rank == expected,
    )


def family_report(family: CoeffFamily, entry_cap: int = DEFAULT_ENTRY_CAP) -> dict:
    """CLI-facing verdict: does the family expand to the permutation tensor."""
    n = family.num_parties
    if n > TENSOR_LIMIT:
        raise ValueError(f"family verification limited to N <= {TENSOR_LIMIT}")
    reconstructs = family_to_tensor(family, entry_cap=entry_cap) == permanent_tensor(n, entry_cap=entry_cap)
    lower = comb(n, n // 2)
    return {
        "N": n,
        "reconstructs_permanent": reconstructs,
        "terms": family.num_terms,
        "lower_bound": lower,
        "satisfied": family.num_terms >= lower,
    }
