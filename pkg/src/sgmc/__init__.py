"""Piecewise-linear minimum-norm solution maps of the sGMC/LASSO sparse
least-squares model, traced by an extended least angle regression."""

__version__ = "0.1.0"

from .model import (
    ModelMatrices,
    ProblemInstance,
    build_model_matrices,
    indicator_from_string,
    indicator_to_string,
    load_instance,
    saddle_objective,
    slice_columns,
    split_extended,
    support,
    zero_indicator,
)
from .optimality import (
    OptReport,
    SolutionSummary,
    check_opt,
    correlation,
    encode_sopt,
    l1_bound_holds,
    summarize,
)
from .candidate import (
    CandidatePiece,
    IncompatibleIndicatorError,
    candidate_slope,
    eqnq_membership,
    eval_weq,
    is_compatible,
    strictly_inside,
    zone_membership,
    zone_slack,
)
from .sweep import (
    LineInterval,
    LineRestrictedPiece,
    ParameterLine,
    ZoneExitTimes,
    f_tmax,
    restrict_to_line,
    zone_entry_time,
    zone_exit_times,
    zone_line_interval,
)
from .elars import (
    AssumptionReport,
    EnumerationConfig,
    InitializationError,
    IterationResult,
    PathSegment,
    PathSweepResult,
    ZoneGraph,
    diagnose_assumptions,
    elars_iterate,
    enumerate_zones,
    evaluate_path,
    initialize_indicator,
    path_sweep,
)
from .oracle import (
    BruteForceResult,
    InfeasibleSystemError,
    LassoConfig,
    NonConvergenceError,
    OracleConfig,
    brute_force_indicators,
    lasso_reference,
    min_norm_over_eqnq,
    solve_saddle,
)
