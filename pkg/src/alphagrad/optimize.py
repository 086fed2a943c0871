"""Fixed-step gradient descent driven by a selectable estimator.

No line search, momentum, or adaptivity: comparability across estimators is
the point.  The only safeguard is a gradient-norm clip at 1e6 against
numeric overflow, logged when it fires.  Evaluation costs come from a fixed
noise set shared by every iteration and estimator so the reported curves are
directly comparable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .engine import (
    ConfigurationError,
    DivergedRolloutError,
    EnvModel,
    NoiseModel,
    Policy,
    run_batch,
)
from .estimators import aobg, fobg, zobg
from .streams import derive_seed

GRAD_CLIP = 1e6

ESTIMATORS = ("fobg", "zobg", "aobg")


@dataclass(frozen=True)
class OptRun:
    """Iterate history of one gradient-descent run."""

    estimator: str
    thetas: np.ndarray  # (T_done + 1, d); last row is the final iterate
    costs: np.ndarray  # (T_done,) Monte-Carlo cost at each visited iterate
    cost_stderrs: np.ndarray  # (T_done,)
    alphas: np.ndarray  # (T_done,) blend weight used at each step
    sig0sq: np.ndarray
    sig1sq: np.ndarray
    gaps: np.ndarray  # (T_done,) ||fobg - zobg|| per step (aobg only)
    epsilons: np.ndarray
    feasible: np.ndarray  # (T_done,) bool
    clipped: np.ndarray  # (T_done,) bool, gradient-norm clip fired
    seed: int
    diverged: bool = False
    config: dict = field(default_factory=dict)

    @property
    def steps_done(self) -> int:
        return self.costs.shape[0]


def evaluate_objective(
    env: EnvModel,
    policy: Policy,
    theta,
    n_eval: int,
    noise: NoiseModel,
    eval_seed: int,
):
    """Monte-Carlo estimate (mean, stderr) of the smoothed objective.

    The noise block depends only on (eval_seed, "eval"), so repeated calls
    reuse the same sample set and differences across thetas are paired.
    """
    if n_eval < 2:
        raise ConfigurationError("n_eval must be >= 2")
    noises = noise.draw(n_eval, env.horizon, eval_seed, "eval")
    out = run_batch(env, policy, theta, np.asarray(env.x1, dtype=float), noises)
    with np.errstate(over="ignore", invalid="ignore"):
        mean = float(out.total.mean())
        stderr = float(out.total.std(ddof=1) / np.sqrt(n_eval))
    return mean, stderr


def gradient_descent(
    env: EnvModel,
    policy: Policy,
    theta0,
    estimator: str,
    steps: int,
    lr: float,
    n_samples: int,
    noise: NoiseModel,
    *,
    gamma: float = 1.0,
    delta: float = 0.05,
    R: Optional[float] = None,
    n_eval: int = 1000,
    seed: int = 0,
) -> OptRun:
    """theta_{t+1} = theta_t - lr * g_t with g_t from the chosen estimator.

    Estimator batches draw fresh streams per iteration; first- and
    zeroth-order streams stay disjoint.  A diverged rollout ends the run
    early with the partial history and the diverged flag set.
    """
    if estimator not in ESTIMATORS:
        raise ConfigurationError(f"estimator must be one of {ESTIMATORS}")
    if steps < 1:
        raise ConfigurationError("steps must be >= 1")
    if not lr > 0:
        raise ConfigurationError("lr must be > 0")
    theta = np.asarray(theta0, dtype=float).copy()
    x1 = np.asarray(env.x1, dtype=float)
    eval_seed = derive_seed(seed, "evaluation")

    thetas = [theta.copy()]
    cols = {k: [] for k in
            ("costs", "stderrs", "alphas", "sig0", "sig1", "gaps", "eps", "feas", "clip")}
    diverged = False

    for t in range(steps):
        try:
            cost, stderr = evaluate_objective(env, policy, theta, n_eval, noise, eval_seed)
            if estimator == "fobg":
                fb = fobg(env, policy, theta, x1, n_samples, noise, seed,
                          stream_label=f"fobg/{t}")
                grad = fb.mean
                alpha, sig0, sig1 = 1.0, float("nan"), fb.emp_var
                gap = eps = float("nan")
                feas = True
            elif estimator == "zobg":
                zb = zobg(env, policy, theta, x1, n_samples, noise, seed,
                          stream_label=f"zobg/{t}")
                grad = zb.mean
                alpha, sig0, sig1 = 0.0, zb.emp_var, float("nan")
                gap = eps = float("nan")
                feas = True
            else:
                fb = fobg(env, policy, theta, x1, n_samples, noise, seed,
                          stream_label=f"fobg/{t}")
                zb = zobg(env, policy, theta, x1, n_samples, noise, seed,
                          stream_label=f"zobg/{t}")
                grad, dec = aobg(fb, zb, gamma=gamma, delta=delta, R=R)
                alpha, sig0, sig1 = dec.alpha, zb.emp_var, fb.emp_var
                gap, eps, feas = dec.gap, dec.epsilon, dec.feasible
        except DivergedRolloutError:
            diverged = True
            break

        logged = np.array([cost, stderr, alpha, sig0, sig1, gap, eps])
        if not np.all(np.isfinite(grad)) or np.any(np.isinf(logged)) or np.isnan(cost):
            diverged = True
            break

        gnorm = float(np.linalg.norm(grad))
        clipped = gnorm > GRAD_CLIP
        if clipped:
            grad = grad * (GRAD_CLIP / gnorm)
        cols["costs"].append(cost)
        cols["stderrs"].append(stderr)
        cols["alphas"].append(alpha)
        cols["sig0"].append(sig0)
        cols["sig1"].append(sig1)
        cols["gaps"].append(gap)
        cols["eps"].append(eps)
        cols["feas"].append(feas)
        cols["clip"].append(clipped)
        theta = theta - lr * grad
        thetas.append(theta.copy())

    return OptRun(
        estimator=estimator,
        thetas=np.array(thetas),
        costs=np.array(cols["costs"]),
        cost_stderrs=np.array(cols["stderrs"]),
        alphas=np.array(cols["alphas"]),
        sig0sq=np.array(cols["sig0"]),
        sig1sq=np.array(cols["sig1"]),
        gaps=np.array(cols["gaps"]),
        epsilons=np.array(cols["eps"]),
        feasible=np.array(cols["feas"], dtype=bool),
        clipped=np.array(cols["clip"], dtype=bool),
        seed=seed,
        diverged=diverged,
        config={
            "estimator": estimator,
            "steps": steps,
            "lr": lr,
            "n_samples": n_samples,
            "sigma": noise.sigma,
            "gamma": gamma,
            "delta": delta,
            "n_eval": n_eval,
        },
    )
