"""qubodr: dynamic-range compression for QUBO matrices.

Annealing hardware programs QUBO coefficients with a handful of effective
bits; a matrix whose values span many orders of magnitude is silently
truncated and the optimum can be lost before the first anneal. This
package shrinks the dynamic range of a matrix by a sequence of
single-entry updates that provably keep every original optimizer optimal,
and ships the search policies, reachability bounds, benchmark generators
and evaluation tooling around that primitive.
"""

from .core import (
    Action,
    Assignment,
    CapExceededError,
    ConfigError,
    DegenerateMatrixError,
    QuboError,
    QuboMatrix,
    SolveResult,
    apply_update,
    energy,
    optimum_included,
    solve_exhaustive,
)
from .metrics import (
    EntryValues,
    GapStructure,
    ValueView,
    bits_required,
    coeff_ratio,
    dr_ratio,
    dynamic_range,
    gap_structure,
    max_coeff_ratio,
    ratio_log2,
    value_view,
)
from .preserve import (
    ExactIntervalProvider,
    UpdateInterval,
    preserving_interval,
    select_update,
    select_update_scored,
)
from .bounds import (
    BoundPair,
    bound_pair,
    dr_lb_ratio,
    dr_lower_bound,
    max_dist_lower_bound,
    min_dist_upper_bound,
)
from .search import (
    ReductionTrace,
    SearchReport,
    StepRecord,
    base_policy_step,
    branch_and_bound,
    candidate_actions,
    greedy_reduce,
    randomized_base_step,
    randomized_reduce,
    rollout_reduce,
    rollout_selection_step,
    value_merge_reduce,
)
from .problems import (
    FAMILIES,
    ProblemInstance,
    gen_bin_clustering,
    gen_mrf,
    gen_subset_sum,
    make_instance,
    regenerate,
    suite,
)
from .sampling import SampleSet, relative_energy, simulated_annealing
from .reports import (
    ExperimentConfig,
    ExperimentReport,
    PolicySpec,
    default_horizon,
    run_experiment,
    run_policy,
    write_report,
)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "Assignment",
    "BoundPair",
    "CapExceededError",
    "ConfigError",
    "DegenerateMatrixError",
    "EntryValues",
    "ExactIntervalProvider",
    "ExperimentConfig",
    "ExperimentReport",
    "FAMILIES",
    "GapStructure",
    "PolicySpec",
    "ProblemInstance",
    "QuboError",
    "QuboMatrix",
    "ReductionTrace",
    "SampleSet",
    "SearchReport",
    "SolveResult",
    "StepRecord",
    "UpdateInterval",
    "ValueView",
    "apply_update",
    "base_policy_step",
    "bits_required",
    "bound_pair",
    "branch_and_bound",
    "candidate_actions",
    "coeff_ratio",
    "default_horizon",
    "dr_lb_ratio",
    "dr_lower_bound",
    "dr_ratio",
    "dynamic_range",
    "energy",
    "gap_structure",
    "gen_bin_clustering",
    "gen_mrf",
    "gen_subset_sum",
    "greedy_reduce",
    "make_instance",
    "max_coeff_ratio",
    "max_dist_lower_bound",
    "min_dist_upper_bound",
    "optimum_included",
    "preserving_interval",
    "randomized_base_step",
    "randomized_reduce",
    "ratio_log2",
    "regenerate",
    "relative_energy",
    "rollout_reduce",
    "rollout_selection_step",
    "run_experiment",
    "run_policy",
    "select_update",
    "select_update_scored",
    "simulated_annealing",
    "solve_exhaustive",
    "suite",
    "value_merge_reduce",
    "value_view",
    "write_report",
]
