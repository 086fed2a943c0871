"""Two point masses on a line with penalty-method (stiff spring) contact.

Body 1 is force-actuated and pushes body 2 toward a goal through a
spring-damper contact.  Stiffness k is the sweep parameter: raising it
approaches rigid contact and blows up pathwise gradient magnitudes long
before the semi-implicit integrator destabilizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import dual
from ..engine import EnvModel, Policy, OPEN_LOOP
from .base import Problem, as_count, reject_unknown


@dataclass(frozen=True)
class PushingParams:
    m1: float = 1.0
    m2: float = 1.0
    half1: float = 0.25  # body half-widths
    half2: float = 0.25
    k: float = 100.0  # contact spring constant, N/m
    damping: float = 0.5  # contact damping, N s/m
    dt: float = 0.02
    goal: float = 1.0  # target position for body 2


def contact_force(state, params: PushingParams):
    """Penalty contact force on body 2 (>= 0 pushes it away from body 1).

    f = k p + damping * (approach speed) gated on p > 0, with penetration
    p = max(0, -gap).  Zero penetration takes the zero-force branch.
    """
    x1, v1, x2, v2 = state
    gap = (x2 - x1) - (params.half1 + params.half2)
    pen = dual.maximum(0.0, -gap)
    spring = params.k * pen
    damp = dual.where(dual.value(pen) > 0.0, params.damping * (v1 - v2), 0.0)
    return spring + damp


def pushing_step(state, u, params: PushingParams):
    """Semi-implicit Euler step; accepts plain arrays or Duals."""
    x1, v1, x2, v2 = state
    f = contact_force(state, params)
    v1n = v1 + params.dt * ((u - f) / params.m1)
    v2n = v2 + params.dt * (f / params.m2)
    x1n = x1 + params.dt * v1n
    x2n = x2 + params.dt * v2n
    return (x1n, v1n, x2n, v2n)


def make_pushing(
    k: float = 100.0,
    damping: float = 0.5,
    m1: float = 1.0,
    m2: float = 1.0,
    half1: float = 0.25,
    half2: float = 0.25,
    dt: float = 0.02,
    horizon: int = 200,
    goal: float = 1.0,
    push: float = 0.5,  # nominal open-loop force level
    sigma: float = 0.1,
    **params,
) -> Problem:
    reject_unknown(params, set(), "pushing")
    horizon = as_count("horizon", horizon)
    p = PushingParams(
        m1=m1, m2=m2, half1=half1, half2=half2, k=k, damping=damping, dt=dt, goal=goal
    )
    env = EnvModel(
        name="pushing",
        state_dim=4,
        input_dim=1,
        horizon=horizon,
        dt=dt,
        step=lambda state, inputs: pushing_step(state, inputs[0], p),
        cost=lambda h, state, inputs: (state[2] - p.goal) ** 2,
        x1=(0.0, 0.0, half1 + half2 + 0.1, 0.0),
        kink_indicator=lambda h, s, u: (
            np.asarray(s[2]) - np.asarray(s[0]) - (p.half1 + p.half2)
        )
        == 0.0,
    )
    return Problem(
        env=env,
        policy=Policy(kind=OPEN_LOOP, input_dim=1, horizon=horizon),
        theta0=np.full(horizon, push),
        sigma=sigma,
        n_samples=128,
        gamma=5e4,
        lr=1e-3,
        steps=60,
        eval_samples=256,
    )
