"""Sparse unnormalized multiparty states and the bitstring/word combinatorics.

A state is a map from multi-indices to amplitudes.  A multi-index is a tuple
with one integer basis label per party; labels are always 0-based and live in
``range(local_dim)`` of their party.  Qubit-block parties read a label as an
n-bit string (bit 1 = leftmost = most significant), word parties read it as a
base-d word whose first letter is the most significant digit.

All states are unnormalized: coefficients are exact integers or rationals
(or complex floats for phase-averaged constructions).  Normalization factors
are documentation-only; every identity checked here is scale-invariant.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb, factorial, prod

Amplitude = "int | Fraction | float | complex"

DEFAULT_ENTRY_CAP = 10_000_000

BACKEND_INT = "int"
BACKEND_RATIONAL = "rational"
BACKEND_COMPLEX = "complex"


class SizeCapError(ValueError):
    """Raised when a construction would exceed the configured entry cap."""

    def __init__(self, what: str, needed: int, cap: int):
        super().__init__(
            f"{what} needs {needed} entries, above the cap of {cap}; "
            f"raise the cap explicitly if this size is intended"
        )
        self.needed = needed
        self.cap = cap


def _check_cap(what: str, needed: int, cap: int) -> None:
    if needed > cap:
        raise SizeCapError(what, needed, cap)


def _infer_backend(values) -> str:
    backend = BACKEND_INT
    for v in values:
        if isinstance(v, (complex, float)):
            return BACKEND_COMPLEX
        if isinstance(v, Fraction):
            backend = BACKEND_RATIONAL
        elif not isinstance(v, int):
            raise TypeError(f"unsupported amplitude type {type(v).__name__}")
    return backend


class PureState:
    """Sparse N-party pure state; immutable by convention after construction.

    Entries iterate in lexicographic multi-index order so that serialized
    output is deterministic.  Zero amplitudes are never stored.
    """

    __slots__ = ("num_parties", "local_dims", "amps", "backend")

    def __init__(self, local_dims, amps, backend: str | None = None):
        self.local_dims = tuple(int(d) for d in local_dims)
        if any(d < 1 for d in self.local_dims):
            raise ValueError("local dimensions must be positive")
        self.num_parties = len(self.local_dims)
        clean = {}
        for idx, amp in amps.items():
            key = tuple(idx)
            if len(key) != self.num_parties:
                raise ValueError(f"index {key} has {len(key)} parties, expected {self.num_parties}")
            for label, dim in zip(key, self.local_dims):
                if not 0 <= label < dim:
                    raise ValueError(f"label {label} out of range for local dim {dim} in index {key}")
            if amp == 0:
                continue
            clean[key] = amp
        self.amps = clean
        self.backend = backend if backend is not None else _infer_backend(clean.values())

    # -- queries ---------------------------------------------------------

    def items(self):
        """Entries in canonical (lexicographic) order."""
        return sorted(self.amps.items())

    def support(self) -> frozenset:
        return frozenset(self.amps)

    def num_entries(self) -> int:
        return len(self.amps)

    def amplitude(self, idx):
        return self.amps.get(tuple(idx), 0)

    def is_zero(self) -> bool:
        return not self.amps

    @property
    def is_exact(self) -> bool:
        return self.backend in (BACKEND_INT, BACKEND_RATIONAL)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PureState):
            return NotImplemented
        return self.local_dims == other.local_dims and self.amps == other.amps

    def __repr__(self) -> str:
        return f"PureState(parties={self.num_parties}, dims={list(self.local_dims)}, entries={len(self.amps)})"

    # -- algebra ---------------------------------------------------------

    def __add__(self, other: "PureState") -> "PureState":
        if self.local_dims != other.local_dims:
            raise ValueError("cannot add states with different shapes")
        merged = dict(self.amps)
        for idx, amp in other.amps.items():
            merged[idx] = merged.get(idx, 0) + amp
        return PureState(self.local_dims, merged)

    def __sub__(self, other: "PureState") -> "PureState":
        return self + other.scaled(-1)

    def scaled(self, factor) -> "PureState":
        if factor == 0:
            return PureState(self.local_dims, {})
        return PureState(self.local_dims, {idx: factor * amp for idx, amp in self.amps.items()})

    def tensor(self, other: "PureState") -> "PureState":
        """Plain tensor product: parties of ``other`` appended after ours."""
        dims = self.local_dims + other.local_dims
        out = {}
        for idx_a, amp_a in self.amps.items():
            for idx_b, amp_b in other.amps.items():
                out[idx_a + idx_b] = amp_a * amp_b
        return PureState(dims, out)

    def tensor_power(self, exponent: int, entry_cap: int = DEFAULT_ENTRY_CAP) -> "PureState":
        """Party-grouped tensor power.

        The result keeps ``num_parties`` parties; party p's label packs the
        p-th labels of all copies into one base-``local_dims[p]`` number,
        copy 1 being the most significant digit.  This is the grouping every
        multi-copy decomposition in this package works with.
        """
        if exponent < 1:
            raise ValueError("exponent must be >= 1")
        _check_cap("tensor power", len(self.amps) ** exponent, entry_cap)
        dims = tuple(d ** exponent for d in self.local_dims)
        entries = list(self.amps.items())
        out = {}
        for combo in itertools.product(entries, repeat=exponent):
            key = []
            for p, d in enumerate(self.local_dims):
                label = 0
                for idx, _ in combo:
                    label = label * d + idx[p]
                key.append(label)
            amp = prod(amp for _, amp in combo)
            out[tuple(key)] = amp
        return PureState(dims, out, backend=self.backend)

    # -- serialization ---------------------------------------------------

    def dumps(self) -> str:
        """Sparse dump: header, then one ``index TAB re [TAB im]`` line per entry."""
        lines = [
            "parties=%d\tdims=%s\tbackend=%s"
            % (self.num_parties, ",".join(map(str, self.local_dims)), self.backend)
        ]
        for idx, amp in self.items():
            head = ",".join(map(str, idx))
            if self.backend == BACKEND_COMPLEX:
                z = complex(amp)
                if z.imag == 0:
                    lines.append(f"{head}\t{z.real!r}")
                else:
                    lines.append(f"{head}\t{z.real!r}\t{z.imag!r}")
            else:
                lines.append(f"{head}\t{Fraction(amp)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "PureState":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty state dump")
        header = dict(field.split("=", 1) for field in lines[0].split("\t"))
        dims = tuple(int(d) for d in header["dims"].split(","))
        backend = header.get("backend", BACKEND_INT)
        amps = {}
        for ln in lines[1:]:
            parts = ln.split("\t")
            idx = tuple(int(x) for x in parts[0].split(","))
            if backend == BACKEND_COMPLEX:
                re = float(parts[1])
                im = float(parts[2]) if len(parts) > 2 else 0.0
                amps[idx] = complex(re, im)
            else:
                f = Fraction(parts[1])
                amps[idx] = int(f) if f.denominator == 1 and backend == BACKEND_INT else f
        return cls(dims, amps, backend=backend)


# -- residual helpers ------------------------------------------------------

def max_residual(a: PureState, b: PureState):
    """Largest |a - b| amplitude over the union of supports."""
    if a.local_dims != b.local_dims:
        raise ValueError("states have different shapes")
    worst = 0
    for idx in a.support() | b.support():
        diff = abs(a.amps.get(idx, 0) - b.amps.get(idx, 0))
        if diff > worst:
            worst = diff
    return worst


def first_mismatch(a: PureState, b: PureState):
    """Smallest multi-index where the two states differ, or None."""
    for idx in sorted(a.support() | b.support()):
        if a.amps.get(idx, 0) != b.amps.get(idx, 0):
            return idx
    return None


# -- bitstring / word combinatorics ----------------------------------------

def hamming_weight(bits: int) -> int:
    return bits.bit_count()


def complement(bits: int, n: int) -> int:
    """Flip all n bits."""
    return bits ^ ((1 << n) - 1)


def bit_dot(a: int, b: int) -> int:
    """Bitwise inner product mod 2."""
    return (a & b).bit_count() & 1


def format_bits(bits: int, n: int) -> str:
    return format(bits, "b").zfill(n)


def hamming_set(weight: int, n: int) -> list[int]:
    """All n-bit strings of the given Hamming weight, ascending."""
    if not 0 <= weight <= n:
        raise ValueError(f"weight {weight} out of range for {n}-bit strings")
    out = []
    for ones in itertools.combinations(range(n), weight):
        bits = 0
        for t in ones:
            bits |= 1 << t
        out.append(bits)
    return sorted(out)


def characteristic_vector(word, num_symbols: int) -> tuple[int, ...]:
    """Occurrence counts of symbols 2..d in a word over the alphabet {1..d}.

    Symbol 1 is not counted; its multiplicity is implied by the word length.
    """
    counts = [0] * (num_symbols - 1)
    for s in word:
        if not 1 <= s <= num_symbols:
            raise ValueError(f"symbol {s} outside alphabet 1..{num_symbols}")
        if s >= 2:
            counts[s - 2] += 1
    return tuple(counts)


def word_to_label(word, num_symbols: int) -> int:
    """Encode a word over {1..d} as a base-d integer, first letter most significant."""
    label = 0
    for s in word:
        if not 1 <= s <= num_symbols:
            raise ValueError(f"symbol {s} outside alphabet 1..{num_symbols}")
        label = label * num_symbols + (s - 1)
    return label


def label_to_word(label: int, num_symbols: int, length: int) -> tuple[int, ...]:
    """Decode a base-d integer back into a word over {1..d}."""
    word = [0] * length
    for t in range(length - 1, -1, -1):
        word[t] = label % num_symbols + 1
        label //= num_symbols
    if label:
        raise ValueError("label does not fit in the given word length")
    return tuple(word)


def multiset_arrangements(counts):
    """Yield every distinct arrangement of the multiset 1^c1 2^c2 ... d^cd.

    Arrangements are words (tuples of 1-based symbols) of length sum(counts).
    Work is proportional to the number of arrangements produced.
    """
    total = sum(counts)
    word = [0] * total
    symbols = len(counts)

    def place(sym, free):
        if sym > symbols:
            yield tuple(word)
            return
        for chosen in itertools.combinations(free, counts[sym - 1]):
            for t in chosen:
                word[t] = sym
            taken = set(chosen)
            yield from place(sym + 1, tuple(t for t in free if t not in taken))

    yield from place(1, tuple(range(total)))


def multinomial(counts) -> int:
    return factorial(sum(counts)) // prod(factorial(c) for c in counts)


# -- spec for Dicke-type states ---------------------------------------------

class DickeSpec:
    """Multiplicity profile (j_1 >= ... >= j_d >= 1) of a symmetrized word."""

    __slots__ = ("multiplicities",)

    def __init__(self, multiplicities):
        mults = tuple(int(j) for j in multiplicities)
        if not mults:
            raise ValueError("multiplicity profile must be nonempty")
        if any(j < 1 for j in mults):
            raise ValueError("all multiplicities must be >= 1")
        if any(mults[i] < mults[i + 1] for i in range(len(mults) - 1)):
            raise ValueError("multiplicities must be sorted nonincreasing")
        self.multiplicities = mults

    @property
    def num_parties(self) -> int:
        return sum(self.multiplicities)

    @property
    def num_symbols(self) -> int:
        return len(self.multiplicities)

    def entry_count(self) -> int:
        return multinomial(self.multiplicities)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DickeSpec):
            return NotImplemented
        return self.multiplicities == other.multiplicities

    def __hash__(self) -> int:
        return hash(self.multiplicities)

    def __repr__(self) -> str:
        return f"DickeSpec({list(self.multiplicities)})"


# -- state constructors ------------------------------------------------------

def build_ghz(num_parties: int, levels: int, entry_cap: int = DEFAULT_ENTRY_CAP) -> PureState:
    """Level-diagonal state: sum over l < levels of |l l ... l>."""
    if num_parties < 2:
        raise ValueError("need at least 2 parties")
    if levels < 2:
        raise ValueError("need at least 2 levels")
    _check_cap("level-diagonal state", levels, entry_cap)
    amps = {(l,) * num_parties: 1 for l in range(levels)}
    return PureState([levels] * num_parties, amps, backend=BACKEND_INT)


def build_w(num_parties: int) -> PureState:
    """Sum of all weight-1 qubit strings: |10...0> + ... + |0...01>."""
    if num_parties < 2:
        raise ValueError("need at least 2 parties")
    amps = {}
    for p in range(num_parties):
        idx = [0] * num_parties
        idx[p] = 1
        amps[tuple(idx)] = 1
    return PureState([2] * num_parties, amps, backend=BACKEND_INT)


def build_dicke(spec: DickeSpec, entry_cap: int = DEFAULT_ENTRY_CAP) -> PureState:
    """Coefficient-1 sum over every distinct arrangement of the spec's word.

    Symbols 1..d are stored as labels 0..d-1, so build_dicke((N-1, 1)) is
    literally equal to build_w(N).
    """
    _check_cap("symmetrized word state", spec.entry_count(), entry_cap)
    d = spec.num_symbols
    amps = {}
    for word in multiset_arrangements(spec.multiplicities):
        amps[tuple(s - 1 for s in word)] = 1
    return PureState([d] * spec.num_parties, amps, backend=BACKEND_INT)
