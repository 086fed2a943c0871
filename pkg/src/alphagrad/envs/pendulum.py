"""Frictionless double pendulum, RK4 integrated: the chaos benchmark.

The decision variable is the initial state q1 = (th1, th2, om1, om2); the
injected noise smooths it.  The objective is the squared distance of the
state after ``sim_steps`` RK4 steps from a goal state, so the whole problem
is one-step in the estimator sense while the chaotic horizon lives inside
the cost.  Longer horizons compound the state-transition Jacobians and blow
up pathwise gradients while the cost itself stays bounded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import dual
from ..engine import EnvModel, Policy, OPEN_LOOP
from .base import Problem, as_count, reject_unknown


@dataclass(frozen=True)
class PendulumParams:
    m1: float = 1.0
    m2: float = 1.0
    l1: float = 1.0
    l2: float = 1.0
    gravity: float = 9.81
    dt: float = 1e-3


def _accelerations(q, p: PendulumParams):
    th1, th2, om1, om2 = q
    g, m1, m2, l1, l2 = p.gravity, p.m1, p.m2, p.l1, p.l2
    delta = th1 - th2
    sd, cd = dual.sin(delta), dual.cos(delta)
    den = 2.0 * m1 + m2 - m2 * dual.cos(2.0 * th1 - 2.0 * th2)
    a1 = (
        -g * (2.0 * m1 + m2) * dual.sin(th1)
        - m2 * g * dual.sin(th1 - 2.0 * th2)
        - 2.0 * sd * m2 * (om2 * om2 * l2 + om1 * om1 * l1 * cd)
    ) / (l1 * den)
    a2 = (
        2.0
        * sd
        * (
            om1 * om1 * l1 * (m1 + m2)
            + g * (m1 + m2) * dual.cos(th1)
            + om2 * om2 * l2 * m2 * cd
        )
    ) / (l2 * den)
    return (om1, om2, a1, a2)


def double_pendulum_step(q, params: PendulumParams):
    """One RK4 step of the two-link equations of motion (dual-capable)."""
    dt = params.dt

    def add(a, b, s):
        return tuple(x + s * y for x, y in zip(a, b))

    k1 = _accelerations(q, params)
    k2 = _accelerations(add(q, k1, dt / 2.0), params)
    k3 = _accelerations(add(q, k2, dt / 2.0), params)
    k4 = _accelerations(add(q, k3, dt), params)
    return tuple(
        x + (dt / 6.0) * (a + 2.0 * b + 2.0 * c + d)
        for x, a, b, c, d in zip(q, k1, k2, k3, k4)
    )


def pendulum_energy(q, params: PendulumParams) -> float:
    """Total mechanical energy (angles measured from the downward vertical)."""
    th1, th2, om1, om2 = [np.asarray(c, dtype=float) for c in q]
    p = params
    ke = 0.5 * p.m1 * (p.l1 * om1) ** 2 + 0.5 * p.m2 * (
        (p.l1 * om1) ** 2
        + (p.l2 * om2) ** 2
        + 2.0 * p.l1 * p.l2 * om1 * om2 * np.cos(th1 - th2)
    )
    pe = -(p.m1 + p.m2) * p.gravity * p.l1 * np.cos(th1) - p.m2 * p.gravity * p.l2 * np.cos(
        th2
    )
    return ke + pe


def make_pendulum(
    sim_steps: int = 1000,
    dt: float = 1e-3,
    m1: float = 1.0,
    m2: float = 1.0,
    l1: float = 1.0,
    l2: float = 1.0,
    gravity: float = 9.81,
    goal=(0.0, 0.0, 0.0, 0.0),
    theta0=(2.7, 2.7, 0.0, 0.0),
    sigma: float = 0.1,
    **params,
) -> Problem:
    reject_unknown(params, set(), "pendulum")
    sim_steps = as_count("sim_steps", sim_steps)
    p = PendulumParams(m1=m1, m2=m2, l1=l1, l2=l2, gravity=gravity, dt=dt)
    goal = tuple(float(g) for g in goal)

    def cost(h, state, inputs):
        q = inputs  # initial state is the (noise-smoothed) decision
        for _ in range(sim_steps):
            q = double_pendulum_step(q, p)
        acc = (q[0] - goal[0]) ** 2
        for i in range(1, 4):
            acc = acc + (q[i] - goal[i]) ** 2
        return acc

    env = EnvModel(
        name="pendulum",
        state_dim=1,
        input_dim=4,
        horizon=1,
        dt=dt,
        step=lambda state, inputs: state,
        cost=cost,
        smooth_everywhere=True,
        x1=(0.0,),
    )
    return Problem(
        env=env,
        policy=Policy(kind=OPEN_LOOP, input_dim=4, horizon=1),
        theta0=np.asarray(theta0, dtype=float),
        sigma=sigma,
        n_samples=256,
        gamma=1e4,
        lr=1e-3,
        steps=30,
        eval_samples=256,
    )
