"""Projectile-with-wall and bar momentum-transfer landscapes.

Both are one-step problems with closed-form piecewise costs: the first has a
jump discontinuity plus a flat (blocked) branch, the second a linear ramp
ending in a cliff.  They drive the landscape and gradient-descent case
studies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import dual
from ..engine import ConfigurationError, EnvModel, Policy, OPEN_LOOP
from .base import Problem, reject_unknown


@dataclass(frozen=True)
class BallWallParams:
    v0: float = 12.0  # launch speed, m/s
    gravity: float = 9.81
    wall_x: float = 5.0  # wall distance, m
    wall_h: float = 2.0  # wall height, m


def _ball_wall_value(z, p: BallWallParams):
    """Cost -landing_distance(z), extended to all real launch angles.

    A throw that reaches the wall below its top stops inelastically at the
    wall base (landing distance exactly wall_x); otherwise it lands at the
    unobstructed range v0^2 sin(2z) / g.  The boundary clearance == 0 takes
    the blocked (flat) branch.
    """
    c = dual.cos(z)
    t = dual.sin(z) / c
    span = p.v0**2 / p.gravity
    range_free = span * 2.0 * t / (1.0 + t * t)  # v0^2 sin(2z)/g, via tan
    height_at_wall = p.wall_x * t - (p.gravity * p.wall_x**2 / (2.0 * p.v0**2)) * (
        1.0 + t * t
    )
    blocked = (dual.value(range_free) >= p.wall_x) & (
        dual.value(height_at_wall) <= p.wall_h
    )
    return dual.where(blocked, -p.wall_x, -range_free)


def ball_wall_cost(theta: float, params: BallWallParams = BallWallParams()) -> float:
    """Deterministic landscape value at launch angle theta in (0, pi/2)."""
    if not 0.0 < theta < np.pi / 2:
        raise ConfigurationError(f"launch angle must be in (0, pi/2), got {theta}")
    return float(np.asarray(_ball_wall_value(np.float64(theta), params)))


def ball_wall_clearance(theta, params: BallWallParams = BallWallParams()):
    """Height margin over the wall top at the wall plane (parabola form)."""
    t = np.tan(theta)
    height = params.wall_x * t - (
        params.gravity * params.wall_x**2 / (2.0 * params.v0**2)
    ) * (1.0 + t * t)
    return height - params.wall_h


def make_ballwall(
    v0: float = 12.0,
    gravity: float = 9.81,
    wall_x: float = 5.0,
    wall_h: float = 2.0,
    theta0: float = 0.35,
    sigma: float = 0.06,
    **params,
) -> Problem:
    reject_unknown(params, set(), "ballwall")
    p = BallWallParams(v0=v0, gravity=gravity, wall_x=wall_x, wall_h=wall_h)
    env = EnvModel(
        name="ballwall",
        state_dim=1,
        input_dim=1,
        horizon=1,
        step=lambda state, inputs: state,
        cost=lambda h, state, inputs: _ball_wall_value(inputs[0], p),
        x1=(0.0,),
    )
    # Lower edge of the cleared-wall interval: the jump the smoothing must cross.
    jump = _clearance_root(p)
    return Problem(
        env=env,
        policy=Policy(kind=OPEN_LOOP, input_dim=1, horizon=1),
        theta0=np.array([theta0]),
        sigma=sigma,
        n_samples=1000,
        gamma=25.0,
        lr=0.02,
        steps=100,
        landscape_lo=(0.1,),
        landscape_hi=(1.0,),
        jump_at=jump,
    )


def _clearance_root(p: BallWallParams):
    """Smallest angle with positive wall clearance, or None if never cleared."""
    lo, hi = 1e-3, np.pi / 4
    if ball_wall_clearance(hi, p) <= 0:
        return None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if ball_wall_clearance(mid, p) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class MomentumParams:
    bar_half_length: float = 1.0  # L, m
    speed: float = 5.0  # approach speed, m/s
    mass: float = 1.0  # ball mass, kg
    miss_penalty: float = 10.0  # P


def momentum_cost(z, params: MomentumParams = MomentumParams()):
    """-(transferred angular momentum) on [0, L], miss penalty outside.

    The lever arm is the impact offset z, so the transfer is mass*speed*z;
    past the bar tip (z > L, or z < 0) the ball misses and pays +P.  Both
    endpoints belong to the hit branch.
    """
    zv = dual.value(z)
    hit = (zv >= 0.0) & (zv <= params.bar_half_length)
    return dual.where(hit, -params.mass * params.speed * z, params.miss_penalty)


def make_momentum(
    bar_half_length: float = 1.0,
    speed: float = 5.0,
    mass: float = 1.0,
    miss_penalty: float = 10.0,
    theta0: float = 0.9,
    sigma: float = 0.15,
    **params,
) -> Problem:
    reject_unknown(params, set(), "momentum")
    p = MomentumParams(
        bar_half_length=bar_half_length,
        speed=speed,
        mass=mass,
        miss_penalty=miss_penalty,
    )
    env = EnvModel(
        name="momentum",
        state_dim=1,
        input_dim=1,
        horizon=1,
        step=lambda state, inputs: state,
        cost=lambda h, state, inputs: momentum_cost(inputs[0], p),
        x1=(0.0,),
        kink_indicator=lambda h, s, u: (np.asarray(u[0]) == 0.0)
        | (np.asarray(u[0]) == p.bar_half_length),
    )
    return Problem(
        env=env,
        policy=Policy(kind=OPEN_LOOP, input_dim=1, horizon=1),
        theta0=np.array([theta0]),
        sigma=sigma,
        n_samples=4000,
        gamma=140.0,
        lr=0.02,
        steps=100,
        landscape_lo=(-0.5,),
        landscape_hi=(1.5,),
        jump_at=p.bar_half_length,
    )
