"""Search-free reference computations used to audit the planners."""
from .audit import SoundnessReport, audit_snapshot, unrolled_key
from .combinatorics import (
    RangeExceeded,
    p_abs_bound,
    p_abs_brute_force,
    p_abs_closed_form,
    p_abs_enumerate,
    p_abs_exact,
    p_abs_monte_carlo,
    surjection_count,
)
from .equivalence import value_equivalence_ratios
from .fixed_point import (
    Partition,
    exact_asap_fixed_point,
    exact_ipa_fixed_point,
    p_asap_fixed_point,
    value_spread,
)
from .layered import LayeredFormatError, LayeredMdp, dump_layered, parse_layered, unroll
from .values import ValueTables, evaluate_policy, value_iteration

__all__ = [
    "LayeredFormatError",
    "LayeredMdp",
    "Partition",
    "RangeExceeded",
    "SoundnessReport",
    "ValueTables",
    "audit_snapshot",
    "dump_layered",
    "evaluate_policy",
    "exact_asap_fixed_point",
    "exact_ipa_fixed_point",
    "p_abs_bound",
    "p_abs_brute_force",
    "p_abs_closed_form",
    "p_abs_enumerate",
    "p_abs_exact",
    "p_abs_monte_carlo",
    "p_asap_fixed_point",
    "parse_layered",
    "surjection_count",
    "unroll",
    "unrolled_key",
    "value_equivalence_ratios",
    "value_iteration",
    "value_spread",
]
