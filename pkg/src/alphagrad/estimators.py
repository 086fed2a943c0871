"""First-, zeroth- and alpha-order batched gradient estimators.

The first-order estimator averages exact pathwise derivatives of the
cost-to-go; the zeroth-order one is the score-function (REINFORCE) form with
a zero-noise-rollout baseline.  The alpha-order estimator blends the two
batch means with a weight chosen by minimizing the blended empirical
variance subject to a bias budget: the zeroth-order mean acts as a surrogate
for the true gradient, a vector Bernstein bound turns its sampling error
into a confidence radius, and the observed gap between the two means prices
the first-order bias.

First- and zeroth-order batches always draw from disjoint noise streams, so
the blend's variance is the independent-sum formula that the alpha rule
optimizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .engine import ConfigurationError, EnvModel, NoiseModel, Policy, run_batch

FIRST_ORDER = "first-order"
ZEROTH_ORDER = "zeroth-order"


@dataclass(frozen=True)
class GradientBatch:
    """N per-sample gradient estimates with their mean and spread."""

    per_sample: np.ndarray  # (N, d)
    mean: np.ndarray  # (d,)
    emp_var: float  # (1/(N-1)) sum ||g_i - mean||^2
    n_samples: int
    kind: str
    kink_hits: int = 0  # samples that evaluated exactly on a branch rule

    @property
    def dim(self) -> int:
        return self.per_sample.shape[1]


def _finalize(per_sample: np.ndarray, kind: str, kink_hits: int = 0) -> GradientBatch:
    n = per_sample.shape[0]
    with np.errstate(over="ignore", invalid="ignore"):
        mean = per_sample.mean(axis=0)
        dev = per_sample - mean
        emp_var = float(np.einsum("nd,nd->", dev, dev) / (n - 1))
    return GradientBatch(
        per_sample=per_sample,
        mean=mean,
        emp_var=emp_var,
        n_samples=n,
        kind=kind,
        kink_hits=kink_hits,
    )


def fobg(
    env: EnvModel,
    policy: Policy,
    theta,
    x1,
    n_samples: int,
    noise: NoiseModel,
    seed: int,
    stream_label: str = "fobg",
) -> GradientBatch:
    """First-order batched gradient: mean of exact per-sample derivatives.

    Samples that land exactly on a kink manifold take the environment's
    documented branch rule; their count is reported on the batch.
    """
    if n_samples < 2:
        raise ConfigurationError("n_samples must be >= 2")
    noises = noise.draw(n_samples, env.horizon, seed, stream_label)
    out = run_batch(
        env, policy, theta, x1, noises, with_grad=True, count_kinks=True
    )
    return _finalize(out.grads, FIRST_ORDER, kink_hits=out.kink_hits)


def zobg(
    env: EnvModel,
    policy: Policy,
    theta,
    x1,
    n_samples: int,
    noise: NoiseModel,
    seed: int,
    use_baseline: bool = True,
    stream_label: str = "zobg",
) -> GradientBatch:
    """Zeroth-order batched gradient (score-function form).

    per_sample_i = (V(w_i) - b) / sigma^2 * sum_h D_theta pi(x_h^i)^T w_h^i,
    with b the zero-noise rollout value when ``use_baseline``.  The policy
    Jacobian is evaluated along the noisy trajectory's states.
    """
    if n_samples < 2:
        raise ConfigurationError("n_samples must be >= 2")
    noises = noise.draw(n_samples, env.horizon, seed, stream_label)
    out = run_batch(env, policy, theta, x1, noises, with_scores=True)
    baseline = 0.0
    if use_baseline:
        zero = run_batch(
            env, policy, theta, x1, np.zeros((1, env.horizon, noise.dim))
        )
        baseline = float(zero.total[0])
    with np.errstate(over="ignore", invalid="ignore"):
        weights = (out.total - baseline) / noise.sigma**2
        per_sample = weights[:, None] * out.score_sum
    return _finalize(per_sample, ZEROTH_ORDER)


def empirical_second_moment(batch: GradientBatch) -> float:
    """Sum over samples of squared gradient norms (un-normalized)."""
    return float(np.einsum("nd,nd->", batch.per_sample, batch.per_sample))


def default_R(batch: GradientBatch) -> float:
    """Largest per-sample deviation from the batch mean."""
    dev = batch.per_sample - batch.mean
    return float(np.sqrt(np.max(np.einsum("nd,nd->n", dev, dev))))


def bernstein_epsilon(
    second_moment: float, R: float, n_samples: int, dim: int, delta: float
) -> float:
    """Confidence radius from the vector Bernstein tail.

    Positive root of N eps^2 / 2 = t (s2 + R eps / 3) with t = ln((d+1)/delta),
    so substituting the result back into the tail
    (d+1) exp(-N eps^2 / 2 / (s2 + R eps/3)) returns exactly delta.
    """
    if not 0.0 < delta < 1.0:
        raise ConfigurationError(f"delta must be in (0, 1), got {delta}")
    if second_moment < 0 or R < 0:
        raise ConfigurationError("second_moment and R must be >= 0")
    if n_samples < 1:
        raise ConfigurationError("n_samples must be >= 1")
    t = math.log((dim + 1) / delta)
    b = t * R / 3.0
    return (b + math.sqrt(b * b + 2.0 * n_samples * t * second_moment)) / n_samples


def interpolation_alpha(
    sig0sq: float, sig1sq: float, gap: float, epsilon: float, gamma: float
):
    """Variance-minimizing blend weight under the bias budget.

    Solves min_alpha alpha^2 sig1sq + (1-alpha)^2 sig0sq subject to
    epsilon + alpha * gap <= gamma.  Infeasible budgets (epsilon > gamma)
    fall back to the zeroth-order estimator, (0, False).  A fully degenerate
    batch pair (both variances zero) trusts the first-order mean only as far
    as it agrees with the zeroth-order one.
    """
    if min(sig0sq, sig1sq, gap, epsilon, gamma) < 0:
        raise ConfigurationError("interpolation inputs must be >= 0")
    if epsilon > gamma:
        return 0.0, False
    slack = gamma - epsilon
    if sig0sq == 0.0 and sig1sq == 0.0:
        alpha = 1.0 if gap <= slack else slack / max(gap, 1e-300)
    else:
        alpha_inf = sig0sq / (sig0sq + sig1sq)
        alpha = alpha_inf if alpha_inf * gap <= slack else slack / gap
    return float(min(max(alpha, 0.0), 1.0)), True


@dataclass(frozen=True)
class AlphaDecision:
    """Outcome of the chance-constrained interpolation."""

    alpha: float
    epsilon: float
    gap: float  # ||first-order mean - zeroth-order mean||
    feasible: bool
    inputs: dict = field(default_factory=dict)


def aobg(
    fobg_batch: GradientBatch,
    zobg_batch: GradientBatch,
    gamma: float,
    delta: float,
    R: Optional[float] = None,
):
    """Blend the two batch means: alpha * first-order + (1-alpha) * zeroth.

    The Bernstein radius is computed from the zeroth-order batch's empirical
    second moment; R defaults to that batch's max deviation from its mean.
    Requires batches built from independent sample streams.
    """
    if fobg_batch.dim != zobg_batch.dim:
        raise ConfigurationError(
            f"batch dims differ: {fobg_batch.dim} vs {zobg_batch.dim}"
        )
    if R is None:
        R = default_R(zobg_batch)
    gap = float(np.linalg.norm(fobg_batch.mean - zobg_batch.mean))
    epsilon = bernstein_epsilon(
        empirical_second_moment(zobg_batch),
        R,
        zobg_batch.n_samples,
        zobg_batch.dim,
        delta,
    )
    alpha, feasible = interpolation_alpha(
        zobg_batch.emp_var, fobg_batch.emp_var, gap, epsilon, gamma
    )
    gradient = alpha * fobg_batch.mean + (1.0 - alpha) * zobg_batch.mean
    decision = AlphaDecision(
        alpha=alpha,
        epsilon=epsilon,
        gap=gap,
        feasible=feasible,
        inputs={
            "sig0sq": zobg_batch.emp_var,
            "sig1sq": fobg_batch.emp_var,
            "gamma": gamma,
            "delta": delta,
            "R": R,
            "n_samples": zobg_batch.n_samples,
            "dim": zobg_batch.dim,
        },
    )
    return gradient, decision
