"""Adaptive loss weighting for aligned multi-objective gradient descent.

When several objectives share a minimizer, reweighting them can make the
scalarized problem far better conditioned than any single objective.  This
package provides the weighted descent driver, curvature-adaptive and
Polyak-style weight optimizers, the benchmark problems they are studied on,
and a toolkit that numerically verifies the supporting bounds.
"""

from .core import (
    NumericError,
    ObjectiveOracle,
    ObjectiveSet,
    OptimalInfo,
    UnsupportedQueryError,
    WeightVector,
    residual,
    weighted_gradient,
    weighted_value,
)
from .driver import (
    AdamConfig,
    ConfigurationError,
    GDConfig,
    IterateRecord,
    RunConfig,
    RunTrace,
    WeightingChoice,
    run,
    step_adam,
    step_gd,
)
from .hessians import (
    DiagHessianEstimate,
    HutchinsonConfig,
    diag_hessian_matrix,
    hutchinson_diag,
    hvp_fd,
)
from .linalg import min_eigenpair, spectral_norm, weighted_hessian
from .problems import Problem, ProblemMeta, ProblemSpec, build, build_mlp_matching, misalign
from .weighting import (
    BilinearSolution,
    CamooConfig,
    PamooConfig,
    PamooContext,
    camoo_weights_diag,
    camoo_weights_exact,
    equal_weights,
    pamoo_context,
    pamoo_weights,
    solve_bilinear_pu,
    weight_optimizer_step,
)
from .analysis import (
    RecurrenceParams,
    TheoremParams,
    fit_rate,
    recurrence_simulate_and_bound,
    self_concordance_check,
    theorem_bound_check,
    weyl_degradation_suite,
)

__version__ = "0.1.0"

__all__ = [
    "AdamConfig",
    "BilinearSolution",
    "CamooConfig",
    "ConfigurationError",
    "DiagHessianEstimate",
    "GDConfig",
    "HutchinsonConfig",
    "IterateRecord",
    "NumericError",
    "ObjectiveOracle",
    "ObjectiveSet",
    "OptimalInfo",
    "PamooConfig",
    "PamooContext",
    "Problem",
    "ProblemMeta",
    "ProblemSpec",
    "RecurrenceParams",
    "RunConfig",
    "RunTrace",
    "TheoremParams",
    "UnsupportedQueryError",
    "WeightVector",
    "WeightingChoice",
    "build",
    "build_mlp_matching",
    "camoo_weights_diag",
    "camoo_weights_exact",
    "diag_hessian_matrix",
    "equal_weights",
    "fit_rate",
    "hutchinson_diag",
    "hvp_fd",
    "min_eigenpair",
    "misalign",
    "pamoo_context",
    "pamoo_weights",
    "recurrence_simulate_and_bound",
    "residual",
    "run",
    "self_concordance_check",
    "solve_bilinear_pu",
    "spectral_norm",
    "step_adam",
    "step_gd",
    "theorem_bound_check",
    "weight_optimizer_step",
    "weighted_gradient",
    "weighted_hessian",
    "weighted_value",
    "weyl_degradation_suite",
]
