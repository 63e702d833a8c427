"""Characteristic-vector components of symmetrized-word tensor powers.

The n-th power of a symmetrized word state splits by recording, for every
party, how many times each symbol 2..d occurs in that party's n-letter word
(the party's characteristic vector).  A component keeps only the terms that
actually occur in the power: matching characteristic vectors alone are not
enough, every copy slot must still carry a full arrangement of the word.

Each component is also the average of Pi (j_k+1)^n product terms built from
roots of unity: one phase index l_{k,p} in 0..j_k per symbol k >= 2 and copy
p.  Off-component terms cancel because their phase sums hit a nontrivial
root; on-component terms add up coherently.  ``verify_phase_identity``
evaluates that average literally and compares, exactly while every phase
order is 2 and within a small float tolerance otherwise.
"""

from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import prod

from .states import (
    DEFAULT_ENTRY_CAP,
    DickeSpec,
    PureState,
    SizeCapError,
    build_dicke,
    characteristic_vector,
    first_mismatch,
    label_to_word,
    max_residual,
    multiset_arrangements,
    word_to_label,
)

DEFAULT_PHASE_CAP = 1_000_000
DEFAULT_PHASE_TOL = 1e-9


def check_dicke_label(n: int, spec: DickeSpec, label) -> tuple[tuple[int, ...], ...]:
    """Validate an N-tuple of per-party characteristic vectors."""
    d = spec.num_symbols
    vectors = tuple(tuple(int(x) for x in vec) for vec in label)
    if len(vectors) != spec.num_parties:
        raise ValueError(f"label needs {spec.num_parties} per-party vectors, got {len(vectors)}")
    for vec in vectors:
        if len(vec) != d - 1:
            raise ValueError(f"characteristic vectors must have length {d - 1}")
        if any(x < 0 for x in vec):
            raise ValueError("characteristic vector entries must be nonnegative")
        if sum(vec) > n:
            raise ValueError(f"vector {vec} cannot fit in a word of length {n}")
    totals = tuple(sum(vec[k] for vec in vectors) for k in range(d - 1))
    expected = tuple(n * j for j in spec.multiplicities[1:])
    if totals != expected:
        raise ValueError(f"per-symbol totals {totals} must equal {expected}")
    return vectors


def components_by_label(n: int, spec: DickeSpec, entry_cap: int = DEFAULT_ENTRY_CAP) -> dict:
    """Group the power's support terms by their tuple of characteristic vectors."""
    if n < 1:
        raise ValueError("need n >= 1")
    power = build_dicke(spec, entry_cap=entry_cap).tensor_power(n, entry_cap=entry_cap)
    d = spec.num_symbols
    groups: dict[tuple, dict] = {}
    for idx in power.amps:
        lab = tuple(characteristic_vector(label_to_word(x, d, n), d) for x in idx)
        groups.setdefault(lab, {})[idx] = 1
    return {
        lab: PureState(power.local_dims, amps)
        for lab, amps in sorted(groups.items())
    }


def partition_set(n: int, spec: DickeSpec, entry_cap: int = DEFAULT_ENTRY_CAP) -> list:
    """All component labels with at least one contributing term, sorted.

    Labels whose vector totals work out but which no power term realizes are
    excluded; including them would only add zero components.
    """
    return list(components_by_label(n, spec, entry_cap=entry_cap))


def build_dicke_component(n: int, spec: DickeSpec, label, entry_cap: int = DEFAULT_ENTRY_CAP) -> PureState:
    """Coefficient-1 sum of the power terms whose party words match ``label``.

    Returns the zero state for a sum-consistent label that no term realizes.
    """
    vectors = check_dicke_label(n, spec, label)
    components = components_by_label(n, spec, entry_cap=entry_cap)
    d = spec.num_symbols
    empty = PureState([d ** n] * spec.num_parties, {})
    return components.get(vectors, empty)


@dataclass
class DecompositionReport:
    """Outcome of re-summing all components against the full power."""

    spec: DickeSpec
    n: int
    num_components: int
    total_terms: int
    disjoint: bool
    passed: bool
    first_mismatch: tuple | None

    def to_dict(self) -> dict:
        return {
            "spec": list(self.spec.multiplicities),
            "n": self.n,
            "components": self.num_components,
            "terms": self.total_terms,
            "disjoint": self.disjoint,
            "pass": self.passed,
            "first_mismatch": list(self.first_mismatch) if self.first_mismatch else None,
        }


def verify_dicke_decomposition(n: int, spec: DickeSpec, entry_cap: int = DEFAULT_ENTRY_CAP) -> DecompositionReport:
    """Check the components are support-disjoint and sum to the power exactly."""
    power = build_dicke(spec, entry_cap=entry_cap).tensor_power(n, entry_cap=entry_cap)
    components = components_by_label(n, spec, entry_cap=entry_cap)
    total = PureState(power.local_dims, {})
    term_count = 0
    for comp in components.values():
        total = total + comp
        term_count += comp.num_entries()
    disjoint = term_count == total.num_entries()
    passed = disjoint and total == power
    return DecompositionReport(
        spec=spec,
        n=n,
        num_components=len(components),
        total_terms=term_count,
        disjoint=disjoint,
        passed=passed,
        first_mismatch=first_mismatch(total, power),
    )


# -- phase-averaged product expansion -----------------------------------------

def phase_orders(spec: DickeSpec) -> tuple[int, ...]:
    """Root-of-unity order j_k + 1 for each counted symbol k = 2..d."""
    return tuple(j + 1 for j in spec.multiplicities[1:])


def phase_index_space(n: int, spec: DickeSpec) -> int:
    return prod(o ** n for o in phase_orders(spec))


def words_with_vector(n: int, spec: DickeSpec, vector) -> list[tuple[int, ...]]:
    """All length-n words over {1..d} with the given characteristic vector."""
    counts = (n - sum(vector),) + tuple(vector)
    if counts[0] < 0:
        return []
    return list(multiset_arrangements(counts))


def iter_phase_terms(n: int, spec: DickeSpec, label):
    """Yield (scale, party_vectors) for every phase index.

    ``party_vectors`` is one {encoded word: phase} dict per party and
    ``scale`` is the global phase of the index; amplitudes are exact ints
    when every phase order is 2 and complex floats otherwise.
    """
    vectors = check_dicke_label(n, spec, label)
    d = spec.num_symbols
    orders = phase_orders(spec)
    exact = all(o == 2 for o in orders)
    tables = None
    if not exact:
        tables = [
            [cmath.exp(2j * cmath.pi * e / o) for e in range(o)]
            for o in orders
        ]

    # positions of each counted symbol inside every admissible word, per party
    party_words = []
    for vec in vectors:
        entries = []
        for word in words_with_vector(n, spec, vec):
            positions = tuple(
                tuple(p for p, s in enumerate(word) if s == k + 2)
                for k in range(d - 1)
            )
            entries.append((word_to_label(word, d), positions))
        party_words.append(entries)

    axes = [range(o) for o in orders for _ in range(n)]
    for flat in itertools.product(*axes):
        # flat packs l_{k,p} with symbol-major order: index (k-2)*n + p
        phase_sum_per_order = [sum(flat[k * n: (k + 1) * n]) for k in range(d - 1)]
        if exact:
            scale = -1 if sum(phase_sum_per_order) & 1 else 1
        else:
            scale = prod(tables[k][phase_sum_per_order[k] % orders[k]] for k in range(d - 1))
        party_vectors = []
        for entries in party_words:
            vec = {}
            for encoded, positions in entries:
                exps = [sum(flat[k * n + p] for p in positions[k]) for k in range(d - 1)]
                if exact:
                    vec[encoded] = -1 if sum(exps) & 1 else 1
                else:
                    vec[encoded] = prod(tables[k][exps[k] % orders[k]] for k in range(d - 1))
            party_vectors.append(vec)
        yield scale, party_vectors


@dataclass
class PhaseIdentityReport:
    """Outcome of evaluating the phase-averaged expansion of one component."""

    spec: DickeSpec
    n: int
    label: tuple
    terms_evaluated: int
    max_residual: float
    exact: bool
    passed: bool

    def to_dict(self) -> dict:
        return {
            "spec": list(self.spec.multiplicities),
            "n": self.n,
            "label": [list(v) for v in self.label],
            "terms_evaluated": self.terms_evaluated,
            "max_residual": self.max_residual,
            "exact": self.exact,
            "pass": self.passed,
        }


def verify_phase_identity(
    n: int,
    spec: DickeSpec,
    label,
    phase_cap: int = DEFAULT_PHASE_CAP,
    tol: float = DEFAULT_PHASE_TOL,
    entry_cap: int = DEFAULT_ENTRY_CAP,
) -> PhaseIdentityReport:
    """Evaluate the root-of-unity average and compare with the component.

    The expansion sums one product state per phase index and divides by the
    index count.  With only order-2 phases the comparison is exact integer
    arithmetic; otherwise residuals up to ``tol`` are accepted (amplitudes
    are integers, so 1e-9 sits far below the smallest nonzero gap).
    """
    vectors = check_dicke_label(n, spec, label)
    space = phase_index_space(n, spec)
    if space > phase_cap:
        raise SizeCapError("phase-index space", space, phase_cap)
    exact = all(o == 2 for o in phase_orders(spec))
    component = build_dicke_component(n, spec, vectors, entry_cap=entry_cap)

    accumulated: dict[tuple, object] = {}
    for scale, party_vectors in iter_phase_terms(n, spec, vectors):
        items = [tuple(vec.items()) for vec in party_vectors]
        if not all(items):
            continue
        for combo in itertools.product(*items):
            key = tuple(enc for enc, _ in combo)
            value = scale * prod(ph for _, ph in combo)
            accumulated[key] = accumulated.get(key, 0) + value

    dims = component.local_dims
    if exact:
        reference = component.scaled(space)
        summed = PureState(dims, accumulated)
        residual_int = max_residual(summed, reference)
        residual = Fraction(residual_int, space)
        passed = residual == 0
        max_res = float(residual)
    else:
        scaled = PureState(dims, {k: v / space for k, v in accumulated.items()}, backend="complex")
        residual = max_residual(scaled, component)
        max_res = float(abs(residual))
        passed = max_res <= tol
    return PhaseIdentityReport(
        spec=spec,
        n=n,
        label=vectors,
        terms_evaluated=space,
        max_residual=max_res,
        exact=exact,
        passed=passed,
    )
