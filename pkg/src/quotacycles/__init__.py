"""Quota mechanisms, cyclic reports, and exhaustive checks of the relaxed quota inequality."""

__version__ = "0.1.0"

from .core import (
    Alphabet,
    Message,
    Profile,
    Quota,
    SignalCounts,
    check_inequality1,
    check_inequality2,
    count_signals,
    enumerate_messages,
    mismatch_count,
    quota_deviation,
    validate_quota,
)
from .cyclicity import (
    CyclicityWitness,
    construct_witness_from_violation,
    extract_witness,
    is_cyclic,
    is_cyclic_definition,
    validate_witness,
)
from .graph import (
    BalancedMatch,
    Cycle,
    ReportGraph,
    brute_force_balanced_subset,
    build_report_graph,
    decompose_cycles,
    find_simple_cycle,
    has_nonloop_cycle,
    max_balanced_subset,
)
from .verify import (
    VerificationReport,
    ViolationRecord,
    check_lemma2_bound,
    enumerate_quotas,
    search_ineq1_violations,
    sweep,
    verify_theorem,
)
