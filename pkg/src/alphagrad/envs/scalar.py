"""One-step scalar benchmarks: step cost, relaxed step cost, quadratics.

These use the one-step reduction: the policy is the identity on a single
parameter block, the state is a dummy scalar, and the whole objective is a
function of z = theta + w.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr

from .. import dual
from ..engine import ConfigurationError, EnvModel, Policy, OPEN_LOOP
from .base import Problem, reject_unknown


def heaviside_smoothed(theta: float, sigma: float) -> float:
    """E_w[H(theta + w)] for w ~ N(0, sigma^2): the Gaussian CDF at theta/sigma."""
    if not sigma > 0:
        raise ConfigurationError(f"sigma must be > 0, got {sigma}")
    return ndtr(np.asarray(theta, dtype=float) / sigma)


def coulomb_relaxed(t, nu: float):
    """Continuous piecewise-linear step: 0 below -nu/2, 1 above +nu/2.

    clamp(t/nu + 1/2, 0, 1); slope 1/nu strictly inside the linear region,
    kinks resolve to the flat branch.  Accepts arrays and Duals.
    """
    if not nu > 0:
        raise ConfigurationError(f"nu must be > 0, got {nu}")
    return dual.clip(t * (1.0 / nu) + 0.5, 0.0, 1.0)


def _identity_step(state, inputs):
    return state


def _one_step_env(name, cost, kink_indicator=None, smooth=False) -> EnvModel:
    return EnvModel(
        name=name,
        state_dim=1,
        input_dim=1,
        horizon=1,
        step=_identity_step,
        cost=lambda h, state, inputs: cost(inputs[0]),
        smooth_everywhere=smooth,
        x1=(0.0,),
        kink_indicator=kink_indicator,
    )


def _scalar_policy() -> Policy:
    return Policy(kind=OPEN_LOOP, input_dim=1, horizon=1)


def make_heaviside(theta0: float = 0.0, sigma: float = 1.0, **params) -> Problem:
    reject_unknown(params, set(), "heaviside")
    env = _one_step_env(
        "heaviside",
        cost=lambda z: dual.where(dual.value(z) >= 0.0, 1.0, 0.0),
        kink_indicator=lambda h, s, u: np.asarray(u[0]) == 0.0,
    )
    return Problem(
        env=env,
        policy=_scalar_policy(),
        theta0=np.array([theta0]),
        sigma=sigma,
        n_samples=1000,
        gamma=1.0,
        lr=0.25,
        steps=50,
        landscape_lo=(-3.0,),
        landscape_hi=(3.0,),
        jump_at=0.0,
    )


def make_coulomb(nu: float = 0.1, theta0: float = 0.0, sigma: float = 1.0, **params) -> Problem:
    reject_unknown(params, set(), "coulomb")
    if not nu > 0:
        raise ConfigurationError(f"nu must be > 0, got {nu}")
    env = _one_step_env(
        "coulomb",
        cost=lambda z: coulomb_relaxed(z, nu),
        kink_indicator=lambda h, s, u: np.abs(np.asarray(u[0])) == nu / 2.0,
    )
    return Problem(
        env=env,
        policy=_scalar_policy(),
        theta0=np.array([theta0]),
        sigma=sigma,
        n_samples=1000,
        gamma=1.0,
        lr=0.25,
        steps=50,
        landscape_lo=(-3.0,),
        landscape_hi=(3.0,),
        jump_at=None,
    )


def make_zero(theta0: float = 0.0, sigma: float = 1.0, **params) -> Problem:
    """Identically-zero cost: the degenerate sanity benchmark."""
    reject_unknown(params, set(), "zero")
    env = _one_step_env("zero", cost=lambda z: 0.0 * z, smooth=True)
    return Problem(
        env=env,
        policy=_scalar_policy(),
        theta0=np.array([theta0]),
        sigma=sigma,
        n_samples=100,
        gamma=1.0,
        lr=0.1,
        steps=10,
        landscape_lo=(-1.0,),
        landscape_hi=(1.0,),
    )


def make_quadratic(theta0: float = 1.0, sigma: float = 0.1, **params) -> Problem:
    """min_theta E[(theta + w)^2]: the smooth sanity benchmark."""
    reject_unknown(params, set(), "quadratic")
    env = _one_step_env("quadratic", cost=lambda z: z * z, smooth=True)
    return Problem(
        env=env,
        policy=_scalar_policy(),
        theta0=np.array([theta0]),
        sigma=sigma,
        n_samples=100,
        gamma=40.0,
        lr=0.25,
        steps=40,
        landscape_lo=(-2.0,),
        landscape_hi=(2.0,),
    )


def make_quad2(theta0=(0.5, 0.5), sigma: float = 0.3, **params) -> Problem:
    """Two-step scalar integrator x' = x + u with cost x^2 + u^2."""
    reject_unknown(params, set(), "quad2")
    env = EnvModel(
        name="quad2",
        state_dim=1,
        input_dim=1,
        horizon=2,
        step=lambda state, inputs: (state[0] + inputs[0],),
        cost=lambda h, state, inputs: state[0] * state[0] + inputs[0] * inputs[0],
        smooth_everywhere=True,
        x1=(0.0,),
    )
    return Problem(
        env=env,
        policy=Policy(kind=OPEN_LOOP, input_dim=1, horizon=2),
        theta0=np.asarray(theta0, dtype=float),
        sigma=sigma,
        n_samples=100,
        gamma=40.0,
        lr=0.2,
        steps=40,
    )
