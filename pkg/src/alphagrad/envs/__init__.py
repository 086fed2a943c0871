"""Benchmark registry."""

from __future__ import annotations

from ..engine import ConfigurationError
from .base import Problem
from .friction import make_friction
from .pendulum import make_pendulum
from .pushing import make_pushing
from .scalar import make_coulomb, make_heaviside, make_quad2, make_quadratic, make_zero
from .tennis import make_tennis
from .throwing import make_ballwall, make_momentum

BUILDERS = {
    "heaviside": make_heaviside,
    "zero": make_zero,
    "coulomb": make_coulomb,
    "quadratic": make_quadratic,
    "quad2": make_quad2,
    "ballwall": make_ballwall,
    "momentum": make_momentum,
    "pushing": make_pushing,
    "friction": make_friction,
    "pendulum": make_pendulum,
    "tennis": make_tennis,
}


def make_problem(name: str, params: dict | None = None) -> Problem:
    """Build a named benchmark with parameter overrides."""
    if name not in BUILDERS:
        raise ConfigurationError(
            f"unknown env {name!r}; available: {sorted(BUILDERS)}"
        )
    return BUILDERS[name](**(params or {}))


__all__ = ["Problem", "BUILDERS", "make_problem"]
