"""Undiscounted finite-horizon Ramsey problems, their infinite-horizon
limits, and numerical certification of overtaking optimality."""

from .asymptotics import (
    LimitPath,
    SteadyState,
    elasticity_effect_report,
    horizon_dependence,
    limit_path_closed_form,
    limit_path_numeric,
    log_distance,
    monotone_convergence_report,
    recovery_time,
    recovery_time_gap,
    saving_ratio,
    simulated_recovery_gap,
    steady_state,
)
from .errors import (
    ConvergenceError,
    DegenerateComparisonError,
    DomainError,
    InfeasiblePathError,
    OvertakeError,
    SignConventionError,
    StructuralError,
    UnknownFamilyError,
)
from .liminf import liminf_estimate, liminf_product_check, tail_infimum
from .model import (
    CobbDouglas,
    CRRAUtility,
    FeasibilityVerdict,
    FinitePath,
    LogUtility,
    ModelSpec,
    Production,
    Utility,
    euler_residuals,
    feasibility_check,
    inverse_marginal_utility,
    marginal_utility,
    production,
    production_derivative,
    total_utility,
    utility,
)
from .overtaking import (
    ConditionReport,
    ConvertedPath,
    OvertakingReport,
    appendix_bound,
    bound_check,
    builtin_challengers,
    catch_up_ratio,
    certify_optimality,
    check_condition_i,
    check_condition_ii,
    check_conditions,
    convert_path,
)
from .solvers import (
    DPGrid,
    ShootingConfig,
    saving_schedule,
    solve_bruteforce_dp,
    solve_closed_form,
    solve_shooting,
)

__version__ = "0.1.0"
