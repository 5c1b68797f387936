"""Condition numbers of full rank least squares residuals and orthogonal
projections: tight two-sided estimates, the Jacobian machinery behind them,
empirical verification, and comparisons against the classical textbook
bounds.
"""

from .conditioning import (
    SCALE_PRESETS,
    ConditionEstimates,
    ScaleFactors,
    Table2Row,
    error_bound_rhs,
    projection_condition_bounds,
    residual_condition_bounds,
    residual_condition_wrt_b,
    scale_preset,
    table2_variants,
)
from .core import (
    DEFAULT_TOLERANCES,
    Geometry,
    LsCache,
    LsProblem,
    SpectralData,
    Tolerances,
    geometry,
    nuclear_norm,
    projector_difference_norm,
    solve_least_squares,
    spectral_data,
    vec_index,
    vec_unflatten,
)
from .errors import (
    DegenerateDirection,
    DimensionMismatch,
    LsqCondError,
    NonFullRank,
    OutOfRange,
    ParamOutOfRange,
    ZeroColumn,
    ZeroResidual,
    ZeroSolution,
)
from .generators import (
    BlockNormCase,
    EnsembleSpec,
    EquilibrationResult,
    GvlExample,
    GvlExpected,
    LanczosStep,
    block_norm_case,
    ensemble_specs,
    equilibrate_columns,
    equilibration_experiment,
    gvl_example,
    lanczos_demo,
    random_problem,
)
from .jacobian import (
    DirectionCandidate,
    EmpiricalEstimate,
    Rank2Adjoint,
    SamplerConfig,
    adjoint_rank2,
    apply_residual_jacobian,
    attaining_perturbation,
    canonicalize_direction,
    empirical_condition_wrt_A,
    finite_difference_condition,
    g_objective,
    sandwich_bounds,
    worst_case_direction,
)
from .prior_bounds import (
    PriorBoundRow,
    compare_table,
    gvlh_estimate,
    stewart_estimate,
    wedin_estimate,
)

__version__ = "0.1.0"
