"""Truncated Taylor series ("jets") for exact derivatives of the test functions.

A jet of order n stores c[k] = f^(k)(x0)/k! for k = 0..n.  Coefficient
arrays carry a trailing shape so a whole grid of expansion points is
propagated at once.  Finite differences cannot resolve the exp(-1/w)-type
flatness of the bump functions, so all SRTF derivatives go through here.
"""
from __future__ import annotations

import math

import numpy as np


class Jet:
    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=float)

    @classmethod
    def variable(cls, x0, order: int) -> "Jet":
        x0 = np.asarray(x0, dtype=float)
        c = np.zeros((order + 1,) + x0.shape)
        c[0] = x0
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, value, order: int, shape=()) -> "Jet":
        c = np.zeros((order + 1,) + tuple(shape))
        c[0] = value
        return cls(c)

    @property
    def order(self) -> int:
        return self.c.shape[0] - 1

    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        c = np.zeros_like(self.c)
        c[0] = other
        return Jet(c)

    def __add__(self, other):
        return Jet(self.c + self._lift(other).c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        return Jet(self.c - self._lift(other).c)

    def __rsub__(self, other):
        return Jet(self._lift(other).c - self.c)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * other)
        a, b = self.c, other.c
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
        for k in range(out.shape[0]):
            for i in range(k + 1):
                out[k] += a[i] * b[k - i]
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c / other)
        a, b = self.c, other.c
        q = np.zeros(np.broadcast_shapes(a.shape, b.shape))
        for k in range(q.shape[0]):
            acc = a[k] - sum(b[i] * q[k - i] for i in range(1, k + 1))
            q[k] = acc / b[0]
        return Jet(q)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, p: float):
        a = self.c
        b = np.zeros_like(a)
        b[0] = a[0] ** p
        for k in range(1, a.shape[0]):
            acc = sum(((p + 1) * i - k) * a[i] * b[k - i] for i in range(1, k + 1))
            b[k] = acc / (k * a[0])
        return Jet(b)

    def exp(self) -> "Jet":
        a = self.c
        e = np.zeros_like(a)
        e[0] = np.exp(a[0])
        for k in range(1, a.shape[0]):
            e[k] = sum(i * a[i] * e[k - i] for i in range(1, k + 1)) / k
        return Jet(e)

    def log(self) -> "Jet":
        a = self.c
        out = np.zeros_like(a)
        out[0] = np.log(a[0])
        for k in range(1, a.shape[0]):
            acc = a[k] - sum(i * out[i] * a[k - i] for i in range(1, k)) / k
            out[k] = acc / a[0]
        return Jet(out)

    def deriv(self) -> "Jet":
        """Jet of f' (one order lower)."""
        k = np.arange(1, self.c.shape[0]).reshape((-1,) + (1,) * (self.c.ndim - 1))
        return Jet(self.c[1:] * k)

    def antideriv(self, value0) -> "Jet":
        """Jet of F with F' = self and F(x0) = value0 (one order higher)."""
        k = np.arange(1, self.c.shape[0] + 1).reshape((-1,) + (1,) * (self.c.ndim - 1))
        head = np.asarray(value0, dtype=float)[None, ...] * np.ones((1,) + self.c.shape[1:])
        return Jet(np.concatenate([head, self.c / k]))

    def derivatives(self) -> np.ndarray:
        """Plain derivatives f^(k)(x0), k = 0..order."""
        fact = np.array([math.factorial(k) for k in range(self.c.shape[0])], dtype=float)
        return self.c * fact.reshape((-1,) + (1,) * (self.c.ndim - 1))

    def where(self, mask, other: "Jet") -> "Jet":
        return Jet(np.where(mask, self.c, other.c))
