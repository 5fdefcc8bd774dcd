from .atemporal import (
    check_deterministic,
    check_hidden_variables,
    check_irreducible,
    check_predictable,
    check_structural_flags,
    deletion_candidates,
    partition_split,
    removable_assumptions,
)
from .locality import (
    check_coa,
    check_lightcone_screening,
    check_local_causality,
    check_strong_coa,
    check_weak_coa,
    classify_locality,
)
from .session import Session
from .si import (
    check_statistical_independence,
    check_superdeterministic,
    common_cause_note,
    identify_additional_variables,
)
from .temporal import (
    check_aao_model,
    check_counter_causal,
    check_dynamical_retrocausal,
    check_fid,
    check_fir,
    check_pseudo_retrocausal,
    check_retrocausal_signalling,
    check_superluminal_signalling,
    check_temporal_determinism,
    check_time_reversible,
    classify_causal_order,
    classify_pseudo_order,
)
from .verdict import Classification, Status, Verdict, Witness

__all__ = [
    "Classification",
    "Session",
    "Status",
    "Verdict",
    "Witness",
    "check_aao_model",
    "check_coa",
    "check_counter_causal",
    "check_deterministic",
    "check_dynamical_retrocausal",
    "check_fid",
    "check_fir",
    "check_hidden_variables",
    "check_irreducible",
    "check_lightcone_screening",
    "check_local_causality",
    "check_predictable",
    "check_pseudo_retrocausal",
    "check_retrocausal_signalling",
    "check_statistical_independence",
    "check_strong_coa",
    "check_structural_flags",
    "check_superdeterministic",
    "check_superluminal_signalling",
    "check_temporal_determinism",
    "check_time_reversible",
    "check_weak_coa",
    "classify_causal_order",
    "classify_locality",
    "classify_pseudo_order",
    "common_cause_note",
    "deletion_candidates",
    "identify_additional_variables",
    "partition_split",
    "removable_assumptions",
]
