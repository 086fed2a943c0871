"""Benchmark bundle: an environment plus tuned experiment defaults."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ..engine import ConfigurationError, EnvModel, Policy


@dataclass(frozen=True)
class Problem:
    """An EnvModel with its policy and per-benchmark default settings.

    Numeric defaults (sigma, sample counts, learning rate, gamma, ...) are
    starting points chosen so the desk-scale experiments show their
    qualitative behavior; every one of them can be overridden from the
    experiment config.
    """

    env: EnvModel
    policy: Policy
    theta0: np.ndarray
    sigma: float
    n_samples: int
    gamma: float
    lr: float
    steps: int
    delta: float = 0.05
    eval_samples: int = 1000
    landscape_lo: tuple = ()
    landscape_hi: tuple = ()
    landscape_points: int = 61
    jump_at: Optional[float] = None  # decision value of the landscape jump, if any

    @property
    def x1(self) -> np.ndarray:
        return np.asarray(self.env.x1, dtype=float)

    def with_overrides(self, **kw) -> "Problem":
        return replace(self, **kw)


def reject_unknown(params: dict, allowed: set, env_name: str) -> None:
    unknown = set(params) - allowed
    if unknown:
        raise ConfigurationError(
            f"unknown parameter(s) for env {env_name!r}: {sorted(unknown)}"
        )


def as_count(name: str, value, minimum: int = 1) -> int:
    """Coerce an integer-valued parameter (sweep grids arrive as floats)."""
    if int(value) != value:
        raise ConfigurationError(f"{name} must be an integer, got {value!r}")
    out = int(value)
    if out < minimum:
        raise ConfigurationError(f"{name} must be >= {minimum}, got {out}")
    return out
