"""Box carried on an actuated carrier through relaxed Coulomb friction.

The tangential force on the box saturates at mu * N through a relaxed sign
function with slip tolerance nu; once the box slides past the carrier's
half-length it falls off and permanently loses the friction coupling, a
genuine discontinuity of the rollout map.  Inside the no-fall region the
dynamics are continuous (and smooth away from the sign-function kinks).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import dual
from ..engine import EnvModel, Policy, OPEN_LOOP
from .base import Problem, as_count, reject_unknown
from .scalar import coulomb_relaxed


def relaxed_sign(t, nu: float):
    """Odd, continuous sign relaxation saturating at +-1 outside |t| >= nu/2."""
    return 2.0 * coulomb_relaxed(t, nu) - 1.0


@dataclass(frozen=True)
class FrictionParams:
    mu: float = 0.5
    normal_force: float = 9.81
    nu: float = 0.05  # slip tolerance
    half_length: float = 0.5  # carrier half-length
    m_carrier: float = 5.0
    m_box: float = 1.0
    dt: float = 0.02
    goal: float = 1.0


def friction_step(state, u, params: FrictionParams):
    """Semi-implicit step; 5th coordinate latches to 1 once the box is off."""
    xc, vc, xb, vb, fallen = state
    p = params
    off = dual.where(
        np.abs(dual.value(xb) - dual.value(xc)) > p.half_length, 1.0, fallen
    )
    f_box = p.mu * p.normal_force * relaxed_sign(vc - vb, p.nu) * (1.0 - off)
    vcn = vc + p.dt * ((u - f_box) / p.m_carrier)
    vbn = vb + p.dt * (f_box / p.m_box)
    xcn = xc + p.dt * vcn
    xbn = xb + p.dt * vbn
    return (xcn, vcn, xbn, vbn, off)


def make_friction(
    mu: float = 0.5,
    normal_force: float = 9.81,
    nu: float = 0.05,
    half_length: float = 0.5,
    m_carrier: float = 5.0,
    m_box: float = 1.0,
    dt: float = 0.02,
    horizon: int = 100,
    goal: float = 1.0,
    sigma: float = 0.3,
    **params,
) -> Problem:
    reject_unknown(params, set(), "friction")
    horizon = as_count("horizon", horizon)
    p = FrictionParams(
        mu=mu,
        normal_force=normal_force,
        nu=nu,
        half_length=half_length,
        m_carrier=m_carrier,
        m_box=m_box,
        dt=dt,
        goal=goal,
    )
    env = EnvModel(
        name="friction",
        state_dim=5,
        input_dim=1,
        horizon=horizon,
        dt=dt,
        step=lambda state, inputs: friction_step(state, inputs[0], p),
        cost=lambda h, state, inputs: (state[2] - p.goal) ** 2
        + 1e-3 * inputs[0] * inputs[0],
        x1=(0.0, 0.0, 0.0, 0.0, 0.0),
        kink_indicator=lambda h, s, u: (
            np.abs(np.asarray(s[1]) - np.asarray(s[3])) == p.nu / 2.0
        ),
    )
    return Problem(
        env=env,
        policy=Policy(kind=OPEN_LOOP, input_dim=1, horizon=horizon),
        theta0=np.zeros(horizon),
        sigma=sigma,
        n_samples=128,
        gamma=1e4,
        lr=1e-3,
        steps=60,
        eval_samples=256,
    )
