"""Rollout engine with exact per-sample differentiation.

A control problem is a pair of callables on tuples of per-coordinate arrays:
``step(state, inputs) -> state`` and ``cost(h, state, inputs) -> scalar``.
Both must be written against the helpers in :mod:`alphagrad.dual`, which lets
the same code run on plain float64 arrays (value-only rollouts) and on dual
numbers (rollouts that carry d/d-theta tangents).  All rollouts are batched:
each coordinate is an array over the sample axis.

The closed-loop recursion is the standard one: ``u_h = pi(x_h, theta) + w_h``
and ``x_{h+1} = step(x_h, u_h)``, with the total cost the sum of per-step
costs ``cost(h, x_h, u_h)`` for h = 1..H.

Everything here is immutable and side-effect free; identical inputs always
produce bit-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import dual
from .dual import Dual
from .streams import gaussian_block


class ConfigurationError(ValueError):
    """Inconsistent dimensions or invalid parameter values."""


class DivergedRolloutError(RuntimeError):
    """A rollout produced a non-finite state."""

    def __init__(self, message: str, step: int, sample: int | None = None):
        super().__init__(message)
        self.step = step
        self.sample = sample


class SubstepOverflowError(DivergedRolloutError):
    """Too many contact events inside one timestep (dt too large)."""


@dataclass(frozen=True)
class NoiseModel:
    """Per-step Gaussian injection noise N(0, sigma^2 I_m)."""

    sigma: float
    dim: int

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigurationError(f"noise sigma must be > 0, got {self.sigma}")

    def score(self, w: np.ndarray) -> np.ndarray:
        """Gradient of the Gaussian log-density potential, w / sigma^2."""
        return np.asarray(w, dtype=float) / self.sigma**2

    def draw(self, n_samples: int, horizon: int, seed: int, label: str) -> np.ndarray:
        """(n_samples, horizon, dim) block from the stream (seed, label)."""
        return gaussian_block(seed, label, (n_samples, horizon, self.dim), self.sigma)


@dataclass(frozen=True)
class EnvModel:
    """A discrete-time control system with differentiable callbacks.

    ``step`` and ``cost`` operate on tuples of per-coordinate batch arrays
    (or Duals) and must be branch-explicit via :func:`alphagrad.dual.where`
    so that derivatives on kink manifolds follow the documented branch rule.
    ``kink_indicator(h, state, inputs)`` optionally reports which samples sit
    exactly on such a manifold; estimators surface the count.
    """

    name: str
    state_dim: int
    input_dim: int
    horizon: int
    step: Callable
    cost: Callable
    dt: float = 0.0
    smooth_everywhere: bool = False
    x1: tuple = ()
    kink_indicator: Optional[Callable] = None

    def step_jacobians(self, x, u):
        """Exact (d state'/d x, d state'/d u) at a single point."""
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        n, m = self.state_dim, self.input_dim
        xs = tuple(dual.seed(x[i], i, n + m) for i in range(n))
        us = tuple(dual.seed(u[j], n + j, n + m) for j in range(m))
        out = self.step(xs, us)
        jac = np.array([dual.tangent(c, n + m) for c in out])
        return jac[:, :n], jac[:, n:]

    def cost_gradients(self, h, x, u):
        """Exact (d cost/d x, d cost/d u) at a single point."""
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        n, m = self.state_dim, self.input_dim
        xs = tuple(dual.seed(x[i], i, n + m) for i in range(n))
        us = tuple(dual.seed(u[j], n + j, n + m) for j in range(m))
        g = dual.tangent(self.cost(h, xs, us), n + m)
        return g[:n], g[n:]


OPEN_LOOP = "open-loop"
LINEAR_FEEDBACK = "linear-feedback"


@dataclass(frozen=True)
class Policy:
    """Open-loop input sequence or linear feedback on state features.

    open-loop:       pi_h(x, theta) = theta[(h-1)m : h*m],  d = m * H.
    linear-feedback: pi(x, theta) = K [feat(x); 1] with K of shape
                     m x (F + 1) flattened row-major into theta, where
                     feat(x) selects ``feature_indices`` (all coordinates by
                     default), so d = m * (F + 1).
    """

    kind: str
    input_dim: int
    horizon: int = 1
    state_dim: int = 0
    feature_indices: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in (OPEN_LOOP, LINEAR_FEEDBACK):
            raise ConfigurationError(f"unknown policy kind {self.kind!r}")

    @property
    def features(self) -> tuple:
        if self.feature_indices is not None:
            return tuple(self.feature_indices)
        return tuple(range(self.state_dim))

    @property
    def param_dim(self) -> int:
        if self.kind == OPEN_LOOP:
            return self.input_dim * self.horizon
        return self.input_dim * (len(self.features) + 1)

    def act(self, h, state, theta):
        """pi(x_h, theta) as a tuple of m scalars; theta may be a Dual."""
        m = self.input_dim
        if self.kind == OPEN_LOOP:
            base = (h - 1) * m
            return tuple(theta[base + j] for j in range(m))
        feats = [state[i] for i in self.features] + [1.0]
        width = len(feats)
        out = []
        for j in range(m):
            acc = theta[j * width] * feats[0]
            for k in range(1, width):
                acc = acc + theta[j * width + k] * feats[k]
            out.append(acc)
        return tuple(out)

    def score_terms(self, h, state_vals, w_h):
        """D_theta pi(x_h, theta)^T w_h for a batch; shape (N, d).

        The Jacobian is theta-independent for both policy kinds, so this
        needs only the (noisy-trajectory) state values and the noise.
        """
        n_samples = w_h.shape[0]
        d = self.param_dim
        m = self.input_dim
        if self.kind == OPEN_LOOP:
            out = np.zeros((n_samples, d))
            out[:, (h - 1) * m : h * m] = w_h
            return out
        feats = self.features
        width = len(feats) + 1
        fmat = np.empty((n_samples, width))
        for k, i in enumerate(feats):
            fmat[:, k] = np.broadcast_to(state_vals[i], (n_samples,))
        fmat[:, -1] = 1.0
        return np.einsum("nj,nk->njk", w_h, fmat).reshape(n_samples, d)

    def jac_theta(self, x, h=1):
        """Exact m x d Jacobian of pi with respect to theta at state x."""
        m, d = self.input_dim, self.param_dim
        if self.kind == OPEN_LOOP:
            jac = np.zeros((m, d))
            jac[:, (h - 1) * m : h * m] = np.eye(m)
            return jac
        x = np.asarray(x, dtype=float)
        feats = np.append(x[list(self.features)], 1.0)
        width = feats.size
        jac = np.zeros((m, d))
        for j in range(m):
            jac[j, j * width : (j + 1) * width] = feats
        return jac

    def jac_state(self, theta, x=None):
        """Exact m x n Jacobian of pi with respect to the state."""
        m, n = self.input_dim, self.state_dim
        jac = np.zeros((m, n))
        if self.kind == OPEN_LOOP:
            return jac
        width = len(self.features) + 1
        K = np.asarray(theta, dtype=float).reshape(m, width)
        for k, i in enumerate(self.features):
            jac[:, i] = K[:, k]
        return jac


@dataclass(frozen=True)
class Trajectory:
    """One rollout: states x_{1:H+1}, inputs, noises, per-step costs."""

    states: np.ndarray  # (H+1, n)
    inputs: np.ndarray  # (H, m)
    noises: np.ndarray  # (H, m)
    step_costs: np.ndarray  # (H,)
    total_cost: float

    @property
    def horizon(self) -> int:
        return self.step_costs.shape[0]


def value_to_go(traj: Trajectory, h: int) -> float:
    """Sum of step costs from stage h (1-based) to the horizon."""
    if not 1 <= h <= traj.horizon:
        raise IndexError(f"stage {h} outside 1..{traj.horizon}")
    return float(np.sum(traj.step_costs[h - 1 :]))


def policy_jacobian(policy: Policy, x, theta, h: int = 1) -> np.ndarray:
    """Exact Jacobian d pi / d theta (m x d) at state x."""
    jac = policy.jac_theta(np.asarray(x, dtype=float), h=h)
    d = np.size(np.asarray(theta))
    if d != policy.param_dim:
        raise ConfigurationError(
            f"theta has {d} entries, policy expects {policy.param_dim}"
        )
    return jac


@dataclass
class BatchRollout:
    """Vectorized rollout results over N samples."""

    total: np.ndarray  # (N,) cost-to-go from stage 1
    costs: np.ndarray  # (N, H) per-step costs
    grads: Optional[np.ndarray] = None  # (N, d) d total / d theta
    score_sum: Optional[np.ndarray] = None  # (N, d) sum_h D_theta pi^T w_h
    step_scores: Optional[np.ndarray] = None  # (N, H, d) per-step terms
    kink_hits: int = 0
    final_state: tuple = field(default_factory=tuple)


def _check_dims(env: EnvModel, policy: Policy, theta, x1, noises):
    theta = np.asarray(theta, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    noises = np.asarray(noises, dtype=float)
    if theta.ndim != 1 or theta.size != policy.param_dim:
        raise ConfigurationError(
            f"theta must be a vector of length {policy.param_dim}, got shape {theta.shape}"
        )
    if x1.shape != (env.state_dim,):
        raise ConfigurationError(
            f"x1 must have shape ({env.state_dim},), got {x1.shape}"
        )
    if policy.input_dim != env.input_dim:
        raise ConfigurationError("policy and env disagree on input dimension")
    if policy.kind == OPEN_LOOP and policy.horizon != env.horizon:
        raise ConfigurationError("open-loop policy horizon must match env horizon")
    if noises.shape[-2:] != (env.horizon, env.input_dim):
        raise ConfigurationError(
            f"noises must end in shape ({env.horizon}, {env.input_dim}), got {noises.shape}"
        )
    return theta, x1, noises


def run_batch(
    env: EnvModel,
    policy: Policy,
    theta,
    x1,
    noises: np.ndarray,
    *,
    with_grad: bool = False,
    with_scores: bool = False,
    keep_step_scores: bool = False,
    count_kinks: bool = False,
) -> BatchRollout:
    """Roll out N samples at once; optionally carry exact theta-gradients.

    ``noises`` has shape (N, H, m).  With ``with_grad`` the rollout runs in
    dual arithmetic seeded on theta and returns per-sample gradient rows;
    the value path is arithmetic-identical to the plain rollout.
    """
    theta, x1, noises = _check_dims(env, policy, theta, x1, noises)
    n_samples = noises.shape[0]
    d = policy.param_dim

    if with_grad:
        theta_arg = Dual(theta, np.eye(d))
    else:
        theta_arg = theta

    state = tuple(np.full(n_samples, x1[i]) for i in range(env.state_dim))
    total = None
    costs = np.empty((n_samples, env.horizon))
    score_sum = np.zeros((n_samples, d)) if with_scores else None
    step_scores = (
        np.zeros((n_samples, env.horizon, d)) if (with_scores and keep_step_scores) else None
    )
    kink_hits = 0

    for h in range(1, env.horizon + 1):
        w_h = noises[:, h - 1, :]
        with np.errstate(over="ignore", invalid="ignore"):
            u_pre = policy.act(h, state, theta_arg)
            u = tuple(u_pre[j] + w_h[:, j] for j in range(env.input_dim))

            if with_scores:
                terms = policy.score_terms(h, [dual.value(s) for s in state], w_h)
                score_sum += terms
                if step_scores is not None:
                    step_scores[:, h - 1, :] = terms
            if count_kinks and env.kink_indicator is not None:
                hits = env.kink_indicator(
                    h, [dual.value(s) for s in state], [dual.value(c) for c in u]
                )
                kink_hits += int(np.count_nonzero(hits))

            c = env.cost(h, state, u)
            cvals = np.broadcast_to(dual.value(c), (n_samples,))
        finite_c = np.isfinite(cvals)
        if not np.all(finite_c):
            bad = int(np.argmin(finite_c))
            raise DivergedRolloutError(
                f"non-finite cost at step {h} (sample {bad})", step=h, sample=bad
            )
        costs[:, h - 1] = cvals
        total = c if total is None else total + c

        with np.errstate(over="ignore", invalid="ignore"):
            state = env.step(state, u)
        for coord in state:
            vals = dual.value(coord)
            finite = np.isfinite(vals)
            if not np.all(finite):
                bad = int(np.argmin(np.broadcast_to(finite, (n_samples,))))
                raise DivergedRolloutError(
                    f"non-finite state at step {h} (sample {bad})", step=h, sample=bad
                )

    total_val = np.broadcast_to(dual.value(total), (n_samples,)).astype(float, copy=True)
    grads = None
    if with_grad:
        grads = np.broadcast_to(dual.tangent(total, d), (n_samples, d)).astype(
            float, copy=True
        )
    return BatchRollout(
        total=total_val,
        costs=costs,
        grads=grads,
        score_sum=score_sum,
        step_scores=step_scores,
        kink_hits=kink_hits,
        final_state=tuple(dual.value(c) for c in state),
    )


def rollout(env: EnvModel, policy: Policy, theta, x1, noises) -> Trajectory:
    """Single rollout returning the full trajectory.

    ``noises`` has shape (H, m); the rollout is a pure function of its
    arguments.
    """
    theta, x1, noises = _check_dims(env, policy, theta, x1, noises)
    n, m, H = env.state_dim, env.input_dim, env.horizon
    states = np.empty((H + 1, n))
    inputs = np.empty((H, m))
    step_costs = np.empty(H)

    state = tuple(np.asarray(x1[i], dtype=float) for i in range(n))
    for h in range(1, H + 1):
        states[h - 1] = [float(np.asarray(c)) for c in state]
        with np.errstate(over="ignore", invalid="ignore"):
            u_pre = policy.act(h, state, theta)
            u = tuple(u_pre[j] + noises[h - 1, j] for j in range(m))
            inputs[h - 1] = [float(np.asarray(c)) for c in u]
            step_costs[h - 1] = float(np.asarray(env.cost(h, state, u)))
        if not np.isfinite(step_costs[h - 1]):
            raise DivergedRolloutError(f"non-finite cost at step {h}", step=h)
        with np.errstate(over="ignore", invalid="ignore"):
            state = env.step(state, u)
        for coord in state:
            if not np.all(np.isfinite(np.asarray(coord))):
                raise DivergedRolloutError(f"non-finite state at step {h}", step=h)
    states[H] = [float(np.asarray(c)) for c in state]
    return Trajectory(
        states=states,
        inputs=inputs,
        noises=np.array(noises, dtype=float),
        step_costs=step_costs,
        total_cost=float(step_costs.sum()),
    )


def rollout_with_gradient(env: EnvModel, policy: Policy, theta, x1, noises):
    """(V1, dV1/dtheta) for one noise realization, by dual-number rollout.

    The value is computed with the same arithmetic order as ``rollout``'s
    batched counterpart; the gradient is the exact pathwise derivative
    holding x1 and the noises fixed.
    """
    noises = np.asarray(noises, dtype=float)
    out = run_batch(env, policy, theta, x1, noises[None, ...], with_grad=True)
    return float(out.total[0]), out.grads[0].copy()
