"""2D paddle-bounce task ("tennis") with time-of-impact event handling.

A ball falls under gravity onto a tiltable paddle plane controlled through
planar accelerations and a tilt rate; the goal is to land the ball at a
target point.  Each step updates velocities first, then advances positions
linearly, so the contact gap is linear in time inside a step and the impact
time solves exactly.  The impact time is computed in dual arithmetic, which
injects the implicit-function terms d t*/d(inputs) into every pathwise
derivative through a bounce.

The policy is linear feedback on [ball_x, ball_y, ball_vx, ball_vy,
paddle_x, paddle_y, 1], giving 3 * 7 = 21 parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import dual
from ..engine import EnvModel, Policy, SubstepOverflowError, LINEAR_FEEDBACK
from .base import Problem, as_count, reject_unknown

MAX_IMPACTS_PER_STEP = 4


@dataclass(frozen=True)
class TennisParams:
    restitution: float = 0.9
    gravity: float = 9.81
    dt: float = 0.01
    target: tuple = (3.0, 0.0)
    control_weight: float = 1e-3


def tennis_step(state, u, params: TennisParams):
    """One step: velocity update, then event-resolved linear position phase."""
    bx, by, bvx, bvy, px, py, pvx, pvy, tilt = state
    p = params

    bvy = bvy - p.gravity * p.dt
    pvx = pvx + p.dt * u[0]
    pvy = pvy + p.dt * u[1]
    tilt = tilt + p.dt * u[2]
    nx = -dual.sin(tilt)
    ny = dual.cos(tilt)

    rem = np.broadcast_to(p.dt, np.shape(dual.value(bx))).astype(float)
    for _ in range(MAX_IMPACTS_PER_STEP + 1):
        gap = nx * (bx - px) + ny * (by - py)
        vrel = nx * (bvx - pvx) + ny * (bvy - pvy)
        gap_end = gap + rem * vrel
        crossing = (
            (dual.value(gap) > 0.0)
            & (dual.value(gap_end) <= 0.0)
            & (dual.value(rem) > 0.0)
        )
        if not np.any(crossing):
            bx = bx + rem * bvx
            by = by + rem * bvy
            px = px + rem * pvx
            py = py + rem * pvy
            rem = np.zeros_like(dual.value(rem))
            break
        # Time to impact where crossing; elsewhere burn the remaining time.
        denom = dual.where(crossing, -vrel, 1.0)
        tau = dual.where(crossing, gap / denom, rem)
        bx = bx + tau * bvx
        by = by + tau * bvy
        px = px + tau * pvx
        py = py + tau * pvy
        rem = rem - tau
        vn = nx * (bvx - pvx) + ny * (bvy - pvy)
        kick = (1.0 + p.restitution) * vn
        bvx = dual.where(crossing, bvx - kick * nx, bvx)
        bvy = dual.where(crossing, bvy - kick * ny, bvy)
    if np.any(dual.value(rem) > 1e-12):
        bad = int(np.argmax(dual.value(rem) > 1e-12))
        raise SubstepOverflowError(
            "more than 4 impacts within one dt (dt too large)", step=-1, sample=bad
        )
    return (bx, by, bvx, bvy, px, py, pvx, pvy, tilt)


def ball_energy(state, params: TennisParams):
    """Unit-mass kinetic plus potential energy of the ball."""
    bx, by, bvx, bvy = [np.asarray(dual.value(c), dtype=float) for c in state[:4]]
    return 0.5 * (bvx**2 + bvy**2) + params.gravity * by


def make_tennis(
    restitution: float = 0.9,
    gravity: float = 9.81,
    dt: float = 0.01,
    horizon: int = 200,
    target=(3.0, 0.0),
    control_weight: float = 1e-3,
    sigma: float = 0.1,
    **params,
) -> Problem:
    reject_unknown(params, set(), "tennis")
    horizon = as_count("horizon", horizon)
    p = TennisParams(
        restitution=restitution,
        gravity=gravity,
        dt=dt,
        target=tuple(float(t) for t in target),
        control_weight=control_weight,
    )

    def cost(h, state, inputs):
        c = p.control_weight * (
            inputs[0] * inputs[0] + inputs[1] * inputs[1] + inputs[2] * inputs[2]
        )
        if h == horizon:
            c = c + (state[0] - p.target[0]) ** 2 + (state[1] - p.target[1]) ** 2
        return c

    env = EnvModel(
        name="tennis",
        state_dim=9,
        input_dim=3,
        horizon=horizon,
        dt=dt,
        step=lambda state, inputs: tennis_step(state, inputs, p),
        cost=cost,
        x1=(0.0, 2.0, 1.5, 0.0, 1.2, 0.6, 0.0, 0.0, 0.0),
    )
    policy = Policy(
        kind=LINEAR_FEEDBACK,
        input_dim=3,
        state_dim=9,
        feature_indices=(0, 1, 2, 3, 4, 5),
    )
    return Problem(
        env=env,
        policy=policy,
        theta0=np.zeros(policy.param_dim),
        sigma=sigma,
        n_samples=64,
        gamma=1e4,
        lr=1e-3,
        steps=40,
        eval_samples=128,
    )
