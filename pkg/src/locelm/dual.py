"""Second-order forward-mode dual numbers.

A :class:`Jet` carries a value together with its first and second
derivative along one seeded direction.  Closed-form exact solutions are
written with the functions of this module (``sin``, ``cos``, ``sech`` ...),
which accept plain floats/arrays as well as jets, so one definition serves
both for evaluation and for machine-precision differentiation.
"""

from __future__ import annotations

import numpy as np


class Jet:
    """Truncated Taylor jet ``(f, f', f'')`` along a single direction."""

    __slots__ = ("v", "d", "dd")
    __array_priority__ = 1000

    def __init__(self, v, d=0.0, dd=0.0):
        self.v = np.asarray(v, dtype=float)
        self.d = np.broadcast_to(np.asarray(d, dtype=float), self.v.shape)
        self.dd = np.broadcast_to(np.asarray(dd, dtype=float), self.v.shape)

    @classmethod
    def variable(cls, x) -> "Jet":
        x = np.asarray(x, dtype=float)
        return cls(x, np.ones_like(x), np.zeros_like(x))

    @classmethod
    def constant(cls, x) -> "Jet":
        x = np.asarray(x, dtype=float)
        return cls(x, np.zeros_like(x), np.zeros_like(x))

    def _chain(self, f0, f1, f2) -> "Jet":
        # g(f(x)): g' = g1 f', g'' = g2 f'^2 + g1 f''
        return Jet(f0, f1 * self.d, f2 * self.d**2 + f1 * self.dd)

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.v + other.v, self.d + other.d, self.dd + other.dd)
        return Jet(self.v + other, self.d, self.dd)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.v, -self.d, -self.dd)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return Jet(
                self.v * other.v,
                self.d * other.v + self.v * other.d,
                self.dd * other.v + 2.0 * self.d * other.d + self.v * other.dd,
            )
        return Jet(self.v * other, self.d * other, self.dd * other)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        r = 1.0 / self.v
        return self._chain(r, -(r**2), 2.0 * r**3)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.v / other, self.d / other, self.dd / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        if isinstance(n, Jet):
            raise TypeError("jet exponents are not supported")
        if n == 0:
            return Jet.constant(np.ones_like(self.v))
        return self._chain(
            self.v**n, n * self.v ** (n - 1), n * (n - 1) * self.v ** (n - 2)
        )

    def __repr__(self) -> str:
        return f"Jet(v={self.v!r}, d={self.d!r}, dd={self.dd!r})"


def value(x):
    """Strip the derivative parts (identity on non-jets)."""
    return x.v if isinstance(x, Jet) else x


def sin(x):
    if isinstance(x, Jet):
        s, c = np.sin(x.v), np.cos(x.v)
        return x._chain(s, c, -s)
    return np.sin(x)


def cos(x):
    if isinstance(x, Jet):
        s, c = np.sin(x.v), np.cos(x.v)
        return x._chain(c, -s, -c)
    return np.cos(x)


def exp(x):
    if isinstance(x, Jet):
        e = np.exp(x.v)
        return x._chain(e, e, e)
    return np.exp(x)


def tanh(x):
    if isinstance(x, Jet):
        t = np.tanh(x.v)
        s = 1.0 - t**2
        return x._chain(t, s, -2.0 * t * s)
    return np.tanh(x)


def sech(x):
    if isinstance(x, Jet):
        s = 1.0 / np.cosh(x.v)
        t = np.tanh(x.v)
        # sech' = -sech tanh, sech'' = sech (tanh^2 - sech^2)
        return x._chain(s, -s * t, s * (t**2 - s**2))
    return 1.0 / np.cosh(x)


def mod(x, period: float):
    """``x mod period``; derivatives pass through (the jumps have measure zero)."""
    if isinstance(x, Jet):
        return Jet(np.mod(x.v, period), x.d, x.dd)
    return np.mod(x, period)
