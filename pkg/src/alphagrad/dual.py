"""Forward-mode dual numbers with vector tangents, batched over numpy arrays.

A ``Dual`` carries a float64 value array of shape ``S`` and a tangent array of
shape ``S + (d,)`` holding the derivative of every element with respect to the
``d`` parameters the computation was seeded with.  Arithmetic applies the
chain rule exactly, so a quantity computed from seeded inputs carries its
exact Jacobian row-by-row.

Simulation code is written once against the helper functions in this module
(``where``, ``maximum``, ``sin``, ...) which accept both plain arrays and
Duals; running the same code on plain arrays reproduces the Dual values bit
for bit because the value-path operations are identical.

Branch selection (``where``/``maximum``/``clip``) picks tangents by comparing
values only.  Ties are resolved toward the first argument for ``maximum`` /
``minimum`` and toward the saturated bound for ``clip``; environments rely on
this to obtain the documented one-sided derivative on their kink manifolds.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Dual",
    "seed",
    "constant",
    "value",
    "tangent",
    "where",
    "maximum",
    "minimum",
    "clip",
    "sin",
    "cos",
    "exp",
    "sqrt",
]


def _as_f64(x):
    return np.asarray(x, dtype=np.float64)


class Dual:
    """Value array plus tangent array with one trailing derivative axis."""

    __slots__ = ("val", "tan")

    # Make ndarray <op> Dual defer to the reflected methods below instead of
    # numpy building an object array.
    __array_ufunc__ = None

    def __init__(self, val, tan):
        self.val = _as_f64(val)
        self.tan = _as_f64(tan)
        if self.tan.ndim < 1:
            raise ValueError("tangent must have a trailing derivative axis")

    @property
    def nderiv(self) -> int:
        return self.tan.shape[-1]

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.tan + other.tan)
        return Dual(self.val + _as_f64(other), _bcast_tan(self.tan, np.shape(other)))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.tan - other.tan)
        return Dual(self.val - _as_f64(other), _bcast_tan(self.tan, np.shape(other)))

    def __rsub__(self, other):
        return Dual(_as_f64(other) - self.val, _bcast_tan(-self.tan, np.shape(other)))

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(
                self.val * other.val,
                self.val[..., None] * other.tan + other.val[..., None] * self.tan,
            )
        o = _as_f64(other)
        return Dual(self.val * o, o[..., None] * self.tan)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            inv = 1.0 / other.val
            val = self.val * inv
            return Dual(val, (self.tan - val[..., None] * other.tan) * inv[..., None])
        o = _as_f64(other)
        return Dual(self.val / o, self.tan / o[..., None])

    def __rtruediv__(self, other):
        o = _as_f64(other)
        val = o / self.val
        return Dual(val, -(val / self.val)[..., None] * self.tan)

    def __pow__(self, p):
        if not isinstance(p, (int, float)):
            raise TypeError("Dual exponent must be a plain number")
        val = self.val**p
        return Dual(val, (p * self.val ** (p - 1))[..., None] * self.tan)

    def __neg__(self):
        return Dual(-self.val, -self.tan)

    # -- comparisons act on values ------------------------------------------

    def __lt__(self, other):
        return self.val < value(other)

    def __le__(self, other):
        return self.val <= value(other)

    def __gt__(self, other):
        return self.val > value(other)

    def __ge__(self, other):
        return self.val >= value(other)

    # -- structure -----------------------------------------------------------

    def __getitem__(self, idx):
        # Indices address value axes only; the derivative axis is preserved.
        return Dual(self.val[idx], self.tan[idx])

    def __repr__(self):
        return f"Dual(val={self.val!r}, d={self.nderiv})"


def _bcast_tan(tan, other_shape):
    """Broadcast a tangent against the value-shape of a constant operand."""
    if other_shape == ():
        return tan
    target = np.broadcast_shapes(tan.shape[:-1], other_shape)
    return np.broadcast_to(tan, target + tan.shape[-1:])


def seed(values, index, nderiv):
    """A Dual whose tangent is the unit vector for parameter ``index``."""
    val = _as_f64(values)
    tan = np.zeros(val.shape + (nderiv,))
    tan[..., index] = 1.0
    return Dual(val, tan)


def constant(values, nderiv):
    """A Dual with zero tangent (no dependence on the seeded parameters)."""
    val = _as_f64(values)
    return Dual(val, np.zeros(val.shape + (nderiv,)))


def value(x):
    """Value array of ``x`` whether or not it is a Dual."""
    return x.val if isinstance(x, Dual) else _as_f64(x)


def tangent(x, nderiv=None):
    """Tangent array of ``x``; zeros for a plain array (needs ``nderiv``)."""
    if isinstance(x, Dual):
        return x.tan
    if nderiv is None:
        raise ValueError("nderiv required for plain arrays")
    return np.zeros(np.shape(_as_f64(x)) + (nderiv,))


def _pair_nderiv(a, b):
    for x in (a, b):
        if isinstance(x, Dual):
            return x.nderiv
    return None


def where(cond, a, b):
    """Select elementwise between ``a`` and ``b``; tangents follow values."""
    cond = np.asarray(cond)
    d = _pair_nderiv(a, b)
    if d is None:
        return np.where(cond, a, b)
    av, bv = value(a), value(b)
    return Dual(
        np.where(cond, av, bv),
        np.where(cond[..., None], tangent(a, d), tangent(b, d)),
    )


def maximum(a, b):
    """Elementwise max; on ties the first argument's branch is taken."""
    return where(value(a) >= value(b), a, b)


def minimum(a, b):
    """Elementwise min; on ties the first argument's branch is taken."""
    return where(value(a) <= value(b), a, b)


def clip(x, lo, hi):
    """Clamp to [lo, hi]; boundary points take the saturated (flat) branch."""
    return where(value(x) <= lo, lo, where(value(x) >= hi, hi, x))


def sin(x):
    if isinstance(x, Dual):
        return Dual(np.sin(x.val), np.cos(x.val)[..., None] * x.tan)
    return np.sin(x)


def cos(x):
    if isinstance(x, Dual):
        return Dual(np.cos(x.val), -np.sin(x.val)[..., None] * x.tan)
    return np.cos(x)


def exp(x):
    if isinstance(x, Dual):
        v = np.exp(x.val)
        return Dual(v, v[..., None] * x.tan)
    return np.exp(x)


def sqrt(x):
    if isinstance(x, Dual):
        v = np.sqrt(x.val)
        return Dual(v, (0.5 / v)[..., None] * x.tan)
    return np.sqrt(x)
