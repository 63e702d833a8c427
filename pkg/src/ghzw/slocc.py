"""Weight-component decompositions of W tensor powers and their operator witnesses.

The n-th tensor power of the N-party W state splits into components indexed
by per-party Hamming weights (a_1, ..., a_N) with sum n: every bit position
carries exactly one '1' across the parties, and the component collects the
terms where party p owns a_p positions.  Each component is reachable from a
2^n-level diagonal state by one sign matrix per party; ``build_efg`` builds
those matrices and ``verify_lemma1`` checks the reconstruction identity in
exact integer arithmetic, where it must hold with no tolerance at all.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod

from .states import (
    DEFAULT_ENTRY_CAP,
    PureState,
    _check_cap,
    bit_dot,
    complement,
    first_mismatch,
    hamming_set,
    max_residual,
    multiset_arrangements,
)


class LocalOperator:
    """Sparse matrix acting on one party's local space, stored column-major.

    Column c holds the image of basis vector |c>; no zero entries are kept.
    """

    __slots__ = ("rows", "cols", "columns")

    def __init__(self, rows: int, cols: int, entries=None, columns=None):
        self.rows = int(rows)
        self.cols = int(cols)
        cmap: dict[int, dict] = {}
        if columns is not None:
            for c, col in columns.items():
                cmap[c] = {r: v for r, v in col.items() if v != 0}
        if entries is not None:
            for (r, c), v in entries.items():
                if v != 0:
                    cmap.setdefault(c, {})[r] = v
        for c, col in list(cmap.items()):
            if not 0 <= c < self.cols:
                raise ValueError(f"column {c} out of range")
            for r in col:
                if not 0 <= r < self.rows:
                    raise ValueError(f"row {r} out of range")
            if not col:
                del cmap[c]
        self.columns = cmap

    def column(self, c: int) -> dict:
        return self.columns.get(c, {})

    def entries(self):
        """All (row, col, value) triples, sorted."""
        out = []
        for c, col in self.columns.items():
            for r, v in col.items():
                out.append((r, c, v))
        return sorted(out)

    def num_nonzero(self) -> int:
        return sum(len(col) for col in self.columns.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, LocalOperator):
            return NotImplemented
        return (self.rows, self.cols) == (other.rows, other.cols) and self.columns == other.columns

    def __repr__(self) -> str:
        return f"LocalOperator({self.rows}x{self.cols}, nnz={self.num_nonzero()})"

    def with_entry(self, row: int, col: int, value) -> "LocalOperator":
        """Copy with one entry overwritten (zero deletes); used by mutation tests."""
        entries = {(r, c): v for r, c, v in self.entries()}
        entries[(row, col)] = value
        return LocalOperator(self.rows, self.cols, entries=entries)

    def dumps(self) -> str:
        """Same triple format as state dumps: header, then row TAB col TAB value."""
        backend = "complex" if any(
            isinstance(v, (complex, float)) for _, _, v in self.entries()
        ) else "rational"
        lines = [f"rows={self.rows}\tcols={self.cols}\tbackend={backend}"]
        for r, c, v in self.entries():
            if backend == "complex":
                z = complex(v)
                lines.append(f"{r}\t{c}\t{z.real!r}" + (f"\t{z.imag!r}" if z.imag else ""))
            else:
                lines.append(f"{r}\t{c}\t{Fraction(v)}")
        return "\n".join(lines) + "\n"


def apply_local_operators(state: PureState, operators, entry_cap: int = DEFAULT_ENTRY_CAP) -> PureState:
    """Apply one operator per party (None = identity) by sparse accumulation.

    Works entry by entry, never materializing dense matrices: each input
    entry distributes over the product of its parties' image columns.
    """
    if len(operators) != state.num_parties:
        raise ValueError("need exactly one operator (or None) per party")
    dims = []
    for p, op in enumerate(operators):
        if op is None:
            dims.append(state.local_dims[p])
        else:
            if op.cols != state.local_dims[p]:
                raise ValueError(f"operator for party {p} expects dim {op.cols}, state has {state.local_dims[p]}")
            dims.append(op.rows)
    out: dict[tuple, object] = {}
    for idx, amp in state.amps.items():
        images = []
        for p, op in enumerate(operators):
            if op is None:
                images.append(((idx[p], 1),))
            else:
                col = op.column(idx[p])
                if not col:
                    break
                images.append(tuple(col.items()))
        else:
            for combo in itertools.product(*images):
                key = tuple(r for r, _ in combo)
                value = amp * prod(v for _, v in combo)
                acc = out.get(key, 0) + value
                if acc == 0:
                    out.pop(key, None)
                else:
                    out[key] = acc
                _check_cap("operator image", len(out), entry_cap)
    return PureState(dims, out)


# -- weight components -------------------------------------------------------

def check_component_label(n: int, label) -> tuple[int, ...]:
    label = tuple(int(a) for a in label)
    if len(label) < 2:
        raise ValueError("component label needs at least two parties")
    if any(a < 0 for a in label):
        raise ValueError("component label entries must be nonnegative")
    if sum(label) != n:
        raise ValueError(f"component label {label} does not sum to {n}")
    return label


def component_labels(n: int, num_parties: int = 3) -> list[tuple[int, ...]]:
    """All weight profiles: tuples of nonnegatives summing to n, lexicographic."""
    if num_parties < 2:
        raise ValueError("need at least 2 parties")
    out = []

    def rec(prefix, remaining, parts):
        if parts == 1:
            out.append(prefix + (remaining,))
            return
        for a in range(remaining + 1):
            rec(prefix + (a,), remaining - a, parts - 1)

    rec((), n, num_parties)
    return out


def build_component_w(n: int, label, entry_cap: int = DEFAULT_ENTRY_CAP) -> PureState:
    """Component of the n-th W power with per-party Hamming weights ``label``.

    Terms are the tuples of n-bit strings with exactly one '1' per bit
    position and party p holding label[p] ones; there are n!/prod(a_p!)
    of them, each with coefficient 1.
    """
    label = check_component_label(n, label)
    parties = len(label)
    amps = {}
    # ownership word w: position t belongs to party w[t]; weights fix the counts
    for word in multiset_arrangements(label):
        key = [0] * parties
        for t, owner in enumerate(word):
            key[owner - 1] |= 1 << (n - 1 - t)
        amps[tuple(key)] = 1
        _check_cap("weight component", len(amps), entry_cap)
    return PureState([1 << n] * parties, amps, backend="int")


def decompose_w_power(n: int, num_parties: int = 3, entry_cap: int = DEFAULT_ENTRY_CAP) -> dict:
    """Split the n-th W power into weight components, keyed by label.

    The component supports are pairwise disjoint and sum back to the full
    power; there are C(n+N-1, N-1) components and N^n terms in total.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    _check_cap("W power decomposition", num_parties ** n, entry_cap)
    return {
        label: build_component_w(n, label, entry_cap=entry_cap)
        for label in component_labels(n, num_parties)
    }


# -- sign-matrix witnesses ----------------------------------------------------

def build_efg(n: int, label) -> list[LocalOperator]:
    """One 2^n x 2^n sign matrix per party for the given weight profile.

    The matrix for weight a sends |l> to sum over i of (-1)^{l.comp(i)} |i>,
    i ranging over the weight-a strings; all entries are +-1 on the weight-a
    rows, so each matrix has C(n, a) * 2^n nonzeros.
    """
    label = check_component_label(n, label)
    size = 1 << n
    ops = []
    for a in label:
        rows = [(i, complement(i, n)) for i in hamming_set(a, n)]
        columns = {}
        for l in range(size):
            columns[l] = {i: (-1 if bit_dot(l, ci) else 1) for i, ci in rows}
        ops.append(LocalOperator(size, size, columns=columns))
    return ops


@dataclass
class LemmaReport:
    """Outcome of one sign-matrix reconstruction check."""

    n: int
    label: tuple[int, ...]
    passed: bool
    max_residual: int
    first_mismatch: tuple | None
    terms: int

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "label": list(self.label),
            "pass": self.passed,
            "max_residual": float(self.max_residual),
            "first_mismatch": list(self.first_mismatch) if self.first_mismatch else None,
            "terms": self.terms,
        }


def verify_lemma1(n: int, label, operators=None) -> LemmaReport:
    """Check that the sign matrices map the 2^n-level diagonal state onto
    2^n times the weight component, exactly.

    Passing ``operators`` overrides the freshly built matrices, which lets a
    corrupted matrix demonstrate that the check actually bites.
    """
    label = check_component_label(n, label)
    ops = build_efg(n, label) if operators is None else list(operators)
    size = 1 << n
    diagonal = PureState([size] * len(label), {(l,) * len(label): 1 for l in range(size)})
    image = apply_local_operators(diagonal, ops)
    expected = build_component_w(n, label).scaled(size)
    residual = max_residual(image, expected)
    return LemmaReport(
        n=n,
        label=label,
        passed=residual == 0,
        max_residual=residual,
        first_mismatch=first_mismatch(image, expected),
        terms=size,
    )


@dataclass
class WitnessResult:
    """Per-party operators mapping a level-diagonal state onto a term sum."""

    operators: list[LocalOperator]
    verified: bool
    num_terms: int
    target: PureState = field(repr=False)
    reconstruction: PureState = field(repr=False)


def slocc_witness_from_terms(terms, local_dims=None, entry_cap: int = DEFAULT_ENTRY_CAP) -> WitnessResult:
    """Turn an R-term product decomposition into per-party local operators.

    Term l is a list of local vectors (one dict label->amplitude per party).
    Party p's operator has R columns, column l being term l's party-p vector,
    so applying all operators to the R-level diagonal state reproduces the
    sum of the terms.  The result is re-applied and compared exactly to set
    ``verified``.
    """
    if not terms:
        raise ValueError("need at least one term")
    num_parties = len(terms[0])
    if any(len(term) != num_parties for term in terms):
        raise ValueError("every term must supply one local vector per party")
    norm_terms = [[dict(vec) for vec in term] for term in terms]
    num_terms = len(norm_terms)
    if local_dims is None:
        local_dims = []
        for p in range(num_parties):
            labels = [r for term in norm_terms for r in term[p]]
            local_dims.append(max(labels) + 1 if labels else 1)
    local_dims = list(local_dims)
    operators = []
    for p in range(num_parties):
        columns = {l: norm_terms[l][p] for l in range(num_terms)}
        operators.append(LocalOperator(local_dims[p], num_terms, columns=columns))

    target_amps: dict[tuple, object] = {}
    for term in norm_terms:
        vecs = [tuple(vec.items()) for vec in term]
        if not all(vecs):
            continue
        for combo in itertools.product(*vecs):
            key = tuple(r for r, _ in combo)
            value = prod(v for _, v in combo)
            acc = target_amps.get(key, 0) + value
            if acc == 0:
                target_amps.pop(key, None)
            else:
                target_amps[key] = acc
            _check_cap("term expansion", len(target_amps), entry_cap)
    target = PureState(local_dims, target_amps)

    diagonal = PureState([num_terms] * num_parties, {(l,) * num_parties: 1 for l in range(num_terms)})
    reconstruction = apply_local_operators(diagonal, operators, entry_cap=entry_cap)
    exact = target.is_exact and reconstruction.is_exact
    if exact:
        verified = reconstruction == target
    else:
        verified = max_residual(reconstruction, target) <= 1e-9
    return WitnessResult(
        operators=operators,
        verified=verified,
        num_terms=num_terms,
        target=target,
        reconstruction=reconstruction,
    )
