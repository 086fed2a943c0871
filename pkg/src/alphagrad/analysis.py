"""Diagnostics: bias/variance bounds, estimator-form checks, parameter sweeps."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import ndtr

from .engine import (
    ConfigurationError,
    DivergedRolloutError,
    EnvModel,
    NoiseModel,
    Policy,
    run_batch,
)
from .envs import make_problem
from .estimators import fobg, zobg
from .streams import derive_seed


@dataclass(frozen=True)
class EmpiricalBiasSpec:
    """Parameters of a (beta, Delta, S)-empirical-bias event.

    With probability >= 1 - beta the sample looks like a low-spread draw
    whose conditional mean sits Delta away from the true mean.
    """

    beta: float
    delta_gap: float  # Delta
    spread: float  # S
    mean_norm: float  # ||E[z]||

    @property
    def clipped_gap(self) -> float:
        """Delta_0 = max(0, (1-beta) Delta - beta ||E[z]||)."""
        return max(0.0, (1.0 - self.beta) * self.delta_gap - self.beta * self.mean_norm)


def empirical_bias_variance_bound(spec: EmpiricalBiasSpec) -> float:
    """Variance lower bound Delta_0^2 / beta implied by empirical bias."""
    if not 0.0 < spec.beta < 1.0:
        raise ConfigurationError(f"beta must be in (0, 1), got {spec.beta}")
    return spec.clipped_gap**2 / spec.beta


@dataclass(frozen=True)
class BoundInputs:
    """A priori bounds: |V| <= value_bound, ||D_theta pi||_op <= policy_jac_bound."""

    value_bound: float
    policy_jac_bound: float

    def __post_init__(self):
        if not (self.value_bound > 0 and self.policy_jac_bound > 0):
            raise ConfigurationError("both bounds must be > 0")


def zobg_variance_bound(
    bounds: BoundInputs,
    horizon: int,
    noise_dim: int,
    sigma: float,
    n_samples: int,
) -> float:
    """Upper bound B_V^2 B_pi^2 H n / (N sigma^2) on the batch-mean variance.

    With n_samples = 1 this bounds the per-sample variance; it scales with
    the horizon-dimension product but not with dynamics derivatives.
    """
    if min(horizon, noise_dim, sigma, n_samples) <= 0:
        raise ConfigurationError("horizon, noise_dim, sigma, n_samples must be > 0")
    return (
        bounds.value_bound**2
        * bounds.policy_jac_bound**2
        * horizon
        * noise_dim
        / (n_samples * sigma**2)
    )


def fobg_zero_batch_probability(theta: float, nu: float, sigma: float, n_samples: int) -> float:
    """P[every first-order sample of the relaxed-step cost is exactly zero].

    A sample contributes a nonzero derivative only when theta + w lands in
    the linear region (-nu/2, nu/2), which happens with probability
    p_lin = Phi((nu/2 - theta)/sigma) - Phi((-nu/2 - theta)/sigma).
    """
    if not (nu > 0 and sigma > 0):
        raise ConfigurationError("nu and sigma must be > 0")
    p_lin = float(ndtr((nu / 2.0 - theta) / sigma) - ndtr((-nu / 2.0 - theta) / sigma))
    return (1.0 - p_lin) ** n_samples


@dataclass(frozen=True)
class FormsCheck:
    mean_per_step: np.ndarray
    mean_total: np.ndarray
    discrepancy: float  # ||mean_total - mean_per_step||
    discrepancy_se: float  # standard error of the per-sample differences


def reinforce_forms_check(
    env: EnvModel,
    policy: Policy,
    theta,
    x1,
    n_samples: int,
    noise: NoiseModel,
    seed: int,
    use_baseline: bool = True,
) -> FormsCheck:
    """Compare the value-to-go and total-return score-function forms.

    Both are computed on the same samples:
        per-step:  sum_h D pi(x_h)^T w_h / sigma^2 * (V_h - b_h)
        total:     (V_1 - b_1) * sum_h D pi(x_h)^T w_h / sigma^2
    with b_h the zero-noise value-to-go from stage h (sample-independent, so
    it changes neither expectation).  They agree in expectation because
    future noise is uncorrelated with past cost, and sample-by-sample when
    H = 1.
    """
    noises = noise.draw(n_samples, env.horizon, seed, "forms")
    out = run_batch(
        env, policy, theta, x1, noises, with_scores=True, keep_step_scores=True
    )
    inv_sig2 = 1.0 / noise.sigma**2
    # value-to-go V_h per step: reversed cumulative sum of the step costs
    vtg = np.cumsum(out.costs[:, ::-1], axis=1)[:, ::-1]
    if use_baseline:
        zero = run_batch(
            env, policy, theta, x1, np.zeros((1, env.horizon, noise.dim))
        )
        vtg = vtg - np.cumsum(zero.costs[:, ::-1], axis=1)[:, ::-1]
    per_step = inv_sig2 * np.einsum("nhd,nh->nd", out.step_scores, vtg)
    total = inv_sig2 * vtg[:, 0][:, None] * out.score_sum
    diffs = total - per_step
    mean_diff = diffs.mean(axis=0)
    dev = diffs - mean_diff
    var_diff = float(np.einsum("nd,nd->", dev, dev) / (n_samples - 1))
    return FormsCheck(
        mean_per_step=per_step.mean(axis=0),
        mean_total=total.mean(axis=0),
        discrepancy=float(np.linalg.norm(mean_diff)),
        discrepancy_se=float(np.sqrt(var_diff / n_samples)),
    )


@dataclass(frozen=True)
class SweepRow:
    value: float
    var_fobg: float
    var_zobg: float
    mean_fobg: np.ndarray
    mean_zobg: np.ndarray
    zero_batch_rate: float
    diverged: bool = False


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    grid: tuple
    rows: tuple  # of SweepRow

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])


def variance_sweep(
    env_family: str,
    parameter: str,
    grid,
    *,
    n_samples: int,
    seed: int,
    sigma: Optional[float] = None,
    reps: int = 1,
    use_baseline: bool = True,
    env_params: Optional[dict] = None,
) -> SweepResult:
    """Run both estimators over a parameter grid of one env family.

    Per grid value the batch seed derives from (seed, parameter, value), so
    any row is reproducible in isolation.  ``reps`` repeats the batch pair
    with sub-derived seeds; variances are averaged over reps and the
    zero-batch rate is the fraction of reps whose first-order batch is
    identically zero.  Diverged grid points are flagged, not fatal.
    """
    grid = tuple(float(g) for g in grid)
    if not grid:
        raise ConfigurationError("sweep grid must be nonempty")
    if sorted(grid) != list(grid) or len(set(grid)) != len(grid):
        raise ConfigurationError("sweep grid must be strictly increasing")
    rows = []
    for val in grid:
        params = dict(env_params or {})
        params[parameter] = val
        prob = make_problem(env_family, params)
        sig = prob.sigma if sigma is None else sigma
        noise = NoiseModel(sigma=sig, dim=prob.env.input_dim)
        point_seed = derive_seed(seed, parameter, val)
        vf, vz, zero_hits = [], [], 0
        mf = mz = None
        try:
            for rep in range(reps):
                rep_seed = derive_seed(point_seed, "rep", rep) if reps > 1 else point_seed
                fb = fobg(
                    prob.env, prob.policy, prob.theta0, prob.x1, n_samples, noise, rep_seed
                )
                zb = zobg(
                    prob.env,
                    prob.policy,
                    prob.theta0,
                    prob.x1,
                    n_samples,
                    noise,
                    rep_seed,
                    use_baseline=use_baseline,
                )
                vf.append(fb.emp_var)
                vz.append(zb.emp_var)
                zero_hits += int(np.all(fb.per_sample == 0.0))
                mf, mz = fb.mean, zb.mean
            rows.append(
                SweepRow(
                    value=val,
                    var_fobg=float(np.mean(vf)),
                    var_zobg=float(np.mean(vz)),
                    mean_fobg=mf,
                    mean_zobg=mz,
                    zero_batch_rate=zero_hits / reps,
                )
            )
        except DivergedRolloutError:
            d = prob.policy.param_dim
            rows.append(
                SweepRow(
                    value=val,
                    var_fobg=float("nan"),
                    var_zobg=float("nan"),
                    mean_fobg=np.full(d, np.nan),
                    mean_zobg=np.full(d, np.nan),
                    zero_batch_rate=float("nan"),
                    diverged=True,
                )
            )
    return SweepResult(parameter=parameter, grid=grid, rows=tuple(rows))
