"""Shared test oracles, independent of the library's differentiation path."""

import numpy as np
import pytest

from alphagrad.engine import EnvModel, NoiseModel, Policy, rollout


def central_diff(f, x, i=None, rel_step=1e-6):
    """Central finite differences with step rel_step * max(1, |coordinate|).

    f maps a 1-D array to a scalar.  Returns the full gradient, or the
    single component i when given.
    """
    x = np.asarray(x, dtype=float)
    idxs = range(x.size) if i is None else [i]
    out = np.empty(len(list(idxs)))
    for j, k in enumerate(range(x.size) if i is None else [i]):
        h = rel_step * max(1.0, abs(x[k]))
        xp, xm = x.copy(), x.copy()
        xp[k] += h
        xm[k] -= h
        out[j] = (f(xp) - f(xm)) / (2.0 * h)
    return out if i is None else float(out[0])


def bisect_jump(f, lo, hi, iters=200):
    """Locate a jump discontinuity of f on [lo, hi] by interval halving.

    Assumes exactly one jump inside: keeps the half whose endpoint gap is
    larger, shrinking the bracket around the discontinuity.
    """
    flo, fhi = f(lo), f(hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if abs(fmid - flo) >= abs(fhi - fmid):
            hi, fhi = mid, fmid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


def scalar_integrator(horizon=2):
    """phi(x, u) = x + u with cost u^2: the textbook smooth multi-step env."""
    return EnvModel(
        name="integrator",
        state_dim=1,
        input_dim=1,
        horizon=horizon,
        step=lambda s, u: (s[0] + u[0],),
        cost=lambda h, s, u: u[0] * u[0],
        smooth_everywhere=True,
        x1=(0.0,),
    )


def open_loop(horizon, input_dim=1):
    return Policy(kind="open-loop", input_dim=input_dim, horizon=horizon)


class FixedNoise(NoiseModel):
    """Noise model whose draw returns a preset block (for exact examples)."""

    def __init__(self, block, sigma=1.0):
        super().__init__(sigma=sigma, dim=np.asarray(block).shape[-1])
        object.__setattr__(self, "_block", np.asarray(block, dtype=float))

    def draw(self, n_samples, horizon, seed, label):
        assert self._block.shape == (n_samples, horizon, self.dim)
        return self._block.copy()


@pytest.fixture
def rollout_cost():
    """Cost-of-rollout closure factory for finite-difference oracles."""

    def factory(env, policy, x1, noises):
        def f(theta):
            return rollout(env, policy, theta, x1, noises).total_cost

        return f

    return factory
