"""Monte-Carlo policy-gradient estimators over differentiable toy physics.

First-order (pathwise), zeroth-order (score-function with baseline) and
interpolated alpha-order batched gradient estimators, a set of benchmark
systems exhibiting discontinuity, stiffness, flatness and chaos, and the
analysis/optimization drivers that reproduce their bias-variance pathologies.
"""

from .analysis import (
    BoundInputs,
    EmpiricalBiasSpec,
    FormsCheck,
    SweepResult,
    empirical_bias_variance_bound,
    fobg_zero_batch_probability,
    reinforce_forms_check,
    variance_sweep,
    zobg_variance_bound,
)
from .engine import (
    ConfigurationError,
    DivergedRolloutError,
    EnvModel,
    NoiseModel,
    Policy,
    SubstepOverflowError,
    Trajectory,
    policy_jacobian,
    rollout,
    rollout_with_gradient,
    value_to_go,
)
from .estimators import (
    AlphaDecision,
    GradientBatch,
    aobg,
    bernstein_epsilon,
    default_R,
    empirical_second_moment,
    fobg,
    interpolation_alpha,
    zobg,
)
from .envs import BUILDERS, Problem, make_problem
from .optimize import OptRun, evaluate_objective, gradient_descent

__all__ = [
    "AlphaDecision",
    "BUILDERS",
    "BoundInputs",
    "ConfigurationError",
    "DivergedRolloutError",
    "EmpiricalBiasSpec",
    "EnvModel",
    "FormsCheck",
    "GradientBatch",
    "NoiseModel",
    "OptRun",
    "Policy",
    "Problem",
    "SubstepOverflowError",
    "SweepResult",
    "Trajectory",
    "aobg",
    "bernstein_epsilon",
    "default_R",
    "empirical_bias_variance_bound",
    "empirical_second_moment",
    "evaluate_objective",
    "fobg",
    "fobg_zero_batch_probability",
    "gradient_descent",
    "interpolation_alpha",
    "make_problem",
    "policy_jacobian",
    "reinforce_forms_check",
    "rollout",
    "rollout_with_gradient",
    "value_to_go",
    "variance_sweep",
    "zobg",
    "zobg_variance_bound",
]

__version__ = "0.1.0"
