"""Exact desk-scale toolkit for multiparty state decompositions and rank bounds."""

from .states import (
    DEFAULT_ENTRY_CAP,
    DickeSpec,
    PureState,
    SizeCapError,
    build_dicke,
    build_ghz,
    build_w,
    characteristic_vector,
    hamming_set,
    max_residual,
    first_mismatch,
)
from .slocc import (
    LocalOperator,
    apply_local_operators,
    build_component_w,
    build_efg,
    component_labels,
    decompose_w_power,
    slocc_witness_from_terms,
    verify_lemma1,
)
from .dicke import (
    build_dicke_component,
    partition_set,
    verify_dicke_decomposition,
    verify_phase_identity,
)
from .rank import (
    Bipartition,
    classify_222,
    copies_needed,
    dicke_split_count,
    flatten,
    flattening_rank,
    hyperdeterminant_222,
    rank_exact,
    rank_numeric,
    rate_lower_bound,
    sorting_map,
    verify_tight_bound,
    w_power_rank_lower,
)
from .permanent import (
    CoeffFamily,
    family_report,
    family_to_tensor,
    glynn_family,
    perm_brute,
    perm_glynn,
    perm_ryser,
    permanent_tensor,
    verify_lower_bound,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
