"""Partition-of-unity building blocks and super-regular test functions (SRTF).

Both partition constructions reduce to one family of smooth steps

    S(s) = (1/N) * integral_s^1 exp(-c (w(1-w))^(-nu)) dw,   S(0)=1, S(1)=0,

which satisfies S(s) + S(1-s) = 1 exactly by the w -> 1-w symmetry.  The
nu-integral cells use c=1 directly.  The Schwartz mollifier's cumulative
distribution is the same family with c=1/4, nu=1 after x = 2w - 1, so the
convolution cells need no on-the-fly convolution quadrature.

The SRTF profile in the norm variable X:

    rise     0 < X <= w        1 - step(X/w)
    plateau  w < X <= 1        1
    roll     1 < X < X_max     step((X-1)/h(X)),  h(X) = mu2 X^alpha - 1
    zero     X >= X_max        0,                 X_max = mu2^(1/(1-alpha))

where ``step`` is the chosen partition variant's step and ``w`` is the
partition width ``h``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._jets import Jet
from .errors import InputError
from .quadrature import QuadratureConfig, QuadratureEstimate, gauss_legendre, integrate_1d

__all__ = [
    "BumpStep",
    "PartitionParams",
    "SrtfParams",
    "Srtf",
    "CompactBump",
    "mollifier_rho",
    "mollifier_cdf",
    "elementary_u",
    "partition_sum",
    "complement_sum",
    "srtf_f",
    "srtf_derivatives",
    "t_max",
    "fourier_gamma_j",
    "NU_INTEGRAL",
    "CONVOLUTION",
]

NU_INTEGRAL = "nu_integral"
CONVOLUTION = "mollifier_convolution"
_EXP_CUTOFF = 745.0  # exp(-745) underflows to 0 in double precision

_GL_U, _GL_W = gauss_legendre(64)


def _psi(w, c: float, nu: float):
    w = np.asarray(w, dtype=float)
    inside = (w > 0) & (w < 1)
    safe = np.where(inside, w, 0.5)
    arg = c * (safe * (1 - safe)) ** (-nu)
    out = np.where(arg < _EXP_CUTOFF, np.exp(-np.minimum(arg, _EXP_CUTOFF)), 0.0)
    return np.where(inside, out, 0.0)


def _psi_integral_from_zero(s, c: float, nu: float):
    """integral_0^s psi for 0 <= s <= 1/2, two 64-node Gauss panels."""
    s = np.asarray(s, dtype=float)
    total = np.zeros_like(s)
    for lo, hi in ((0.0, 0.5), (0.5, 1.0)):
        a, b = lo * s, hi * s
        nodes = a[..., None] + (b - a)[..., None] * _GL_U
        total = total + (b - a) * (_psi(nodes, c, nu) @ _GL_W)
    return total


@lru_cache(maxsize=None)
def _half_norm(c: float, nu: float) -> float:
    return float(_psi_integral_from_zero(np.array(0.5), c, nu))


@dataclass(frozen=True)
class BumpStep:
    """Smooth monotone step from 1 (s <= 0) to 0 (s >= 1)."""

    c: float = 1.0
    nu: float = 1.0

    def __post_init__(self):
        if not (self.c > 0 and self.nu > 0):
            raise InputError("bump constants c and nu must be positive")

    @property
    def norm(self) -> float:
        return 2.0 * _half_norm(self.c, self.nu)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        half = _half_norm(self.c, self.nu)
        lo = np.clip(s, 0.0, 0.5)
        hi = np.clip(1.0 - s, 0.0, 0.5)
        left = 1.0 - _psi_integral_from_zero(lo, self.c, self.nu) / (2 * half)
        right = _psi_integral_from_zero(hi, self.c, self.nu) / (2 * half)
        out = np.where(s <= 0.5, left, right)
        return out if out.ndim else float(out)

    def psi_jet(self, g: Jet) -> Jet:
        w0 = g.c[0]
        inside = (w0 > 0) & (w0 < 1)
        safe = Jet(np.where(inside, g.c, np.where(np.arange(g.c.shape[0]).reshape((-1,) + (1,) * (g.c.ndim - 1)) == 0, 0.5, 0.0)))
        arg = ((safe * (1.0 - safe)) ** (-self.nu)) * self.c
        live = inside & (arg.c[0] < _EXP_CUTOFF)
        arg = Jet(np.where(live, arg.c, 0.0))
        val = (-arg).exp()
        return Jet(np.where(live, val.c, 0.0))

    def jet(self, g: Jet) -> Jet:
        """Taylor jet of S(g(x)) given the jet of g."""
        value0 = self(g.c[0])
        if g.order == 0:
            return Jet(np.asarray(value0)[None, ...])
        low = Jet(g.c[:-1])
        slope = self.psi_jet(low) * g.deriv() * (-1.0 / self.norm)
        return slope.antideriv(value0)


_MOLLIFIER_STEP = BumpStep(c=0.25, nu=1.0)


def mollifier_rho(x):
    """Normalised Schwartz mollifier, exactly zero for |x| >= 1."""
    x = np.asarray(x, dtype=float)
    w = 0.5 * (1.0 + x)
    out = _psi(w, 0.25, 1.0) / (2.0 * _MOLLIFIER_STEP.norm)
    return out if out.ndim else float(out)


def mollifier_cdf(z):
    """integral_{-1}^z rho."""
    return 1.0 - _MOLLIFIER_STEP(0.5 * (1.0 + np.asarray(z, dtype=float)))


@dataclass(frozen=True)
class PartitionParams:
    """Cell width ``h``, construction variant, smoothing ``eps`` or ``nu``, cell index ``j``."""

    h: float = 1.0
    variant: str = NU_INTEGRAL
    j: int = 0
    eps: float | None = None
    nu: float = 1.0

    def __post_init__(self):
        if not self.h > 0:
            raise InputError(f"h must be positive, got {self.h}")
        if self.variant == NU_INTEGRAL:
            if not self.nu > 0:
                raise InputError(f"nu must be positive, got {self.nu}")
        elif self.variant == CONVOLUTION:
            eps = self.eps if self.eps is not None else 0.25 * self.h
            if not 0 < eps < self.h / 2:
                raise InputError(f"convolution variant needs 0 < eps < h/2, got eps={eps}, h={self.h}")
            object.__setattr__(self, "eps", float(eps))
        else:
            raise InputError(f"unknown partition variant {self.variant!r}")

    def with_j(self, j: int) -> "PartitionParams":
        return PartitionParams(self.h, self.variant, int(j), self.eps, self.nu)

    def with_h(self, h: float) -> "PartitionParams":
        eps = None if self.eps is None else self.eps * h / self.h
        return PartitionParams(h, self.variant, self.j, eps, self.nu)

    @property
    def support(self) -> tuple[float, float]:
        if self.variant == NU_INTEGRAL:
            return ((self.j - 1) * self.h, (self.j + 1) * self.h)
        return (self.j * self.h - self.eps, (self.j + 1) * self.h + self.eps)

    # step profile on [0, 1] in the scaled variable, used by the SRTF
    def step(self, s):
        if self.variant == NU_INTEGRAL:
            return BumpStep(1.0, self.nu)(s)
        r = self.eps / self.h
        return 1.0 - _MOLLIFIER_STEP(0.5 * (1.0 + (0.5 - np.asarray(s, dtype=float)) / r))

    def step_jet(self, g: Jet) -> Jet:
        if self.variant == NU_INTEGRAL:
            return BumpStep(1.0, self.nu).jet(g)
        r = self.eps / self.h
        inner = (1.0 + (0.5 - g) * (1.0 / r)) * 0.5
        return 1.0 - _MOLLIFIER_STEP.jet(inner)


def elementary_u(x, p: PartitionParams):
    """Cell function beta_j(x) of the partition."""
    x = np.asarray(x, dtype=float)
    if p.variant == NU_INTEGRAL:
        out = np.asarray(BumpStep(1.0, p.nu)(np.abs(x - p.j * p.h) / p.h))
    else:
        out = np.asarray(mollifier_cdf((x - p.j * p.h) / p.eps) - mollifier_cdf((x - (p.j + 1) * p.h) / p.eps))
    return out if out.ndim else float(out)


def partition_sum(x, p: PartitionParams, j_range: range | tuple[int, int]):
    """Sum of beta_j(x) over ``j_range`` (inclusive pair or a range)."""
    if isinstance(j_range, tuple):
        j_range = range(j_range[0], j_range[1] + 1)
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for j in j_range:
        total = total + elementary_u(x, p.with_j(j))
    return total if total.ndim else float(total)


def complement_sum(x, p: PartitionParams):
    """Two-piece complement identity, evaluated piece by piece.

    nu-integral: u(x-jh) + u((j+1)h-x) on [jh, (j+1)h].  Convolution: the
    cells there overlap three at a time, so the identity is checked on the
    step itself, R(z) + R(-z) with z = (x-jh)/eps on [jh-eps, jh+eps].
    """
    x = np.asarray(x, dtype=float)
    if p.variant == NU_INTEGRAL:
        step = BumpStep(1.0, p.nu)
        out = np.asarray(step(np.abs(x - p.j * p.h) / p.h) + step(np.abs((p.j + 1) * p.h - x) / p.h))
    else:
        z = (x - p.j * p.h) / p.eps
        out = np.asarray(mollifier_cdf(z) + mollifier_cdf(-z))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SrtfParams:
    """Scale ``mu2``, exponent ``alpha``, partition for the edges, optional alpha -> 1 limit.

    ``partition.h`` is the width of the rise near X = 0; it defaults to
    min(mu2 - 1, 0.5) so the plateau is never empty.
    """

    mu2: float = 2.0
    alpha: float = 0.5
    partition: PartitionParams | None = None
    alpha_limit: bool = False

    def __post_init__(self):
        if not self.mu2 > 1:
            raise InputError(f"mu2 must exceed 1, got {self.mu2}")
        if not 0 < self.alpha < 1:
            raise InputError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.partition is None:
            object.__setattr__(self, "partition", PartitionParams(h=min(self.mu2 - 1.0, 0.5)))
        if not self.partition.h < 1:
            raise InputError("rise width partition.h must be below 1")

    @property
    def x_max(self) -> float:
        if self.alpha_limit:
            return math.inf
        try:
            return self.mu2 ** (1.0 / (1.0 - self.alpha))
        except OverflowError:
            return math.inf

    @property
    def rise_width(self) -> float:
        return self.partition.h


class Srtf:
    """Callable SRTF with exact derivatives (via Taylor jets)."""

    def __init__(self, params: SrtfParams | None = None, **kwargs):
        self.params = params if params is not None else SrtfParams(**kwargs)

    def __repr__(self):
        return f"Srtf({self.params!r})"

    def __call__(self, X):
        return srtf_f(X, self.params)

    def jet(self, g: Jet) -> Jet:
        return _srtf_jet(g, self.params)

    def derivative(self, X, n: int = 1):
        X = np.asarray(X, dtype=float)
        out = _srtf_jet(Jet.variable(X, n), self.params).derivatives()[n]
        return out if out.ndim else float(out)

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, self.params.x_max)


class CompactBump:
    """Smooth bump exp(-1/(w(1-w))) on (a, b), w = (x-a)/(b-a), with exact derivatives."""

    def __init__(self, a: float, b: float):
        if not a < b:
            raise InputError("bump needs a < b")
        self.a, self.b = float(a), float(b)
        self._step = BumpStep(1.0, 1.0)

    @property
    def support(self) -> tuple[float, float]:
        return (self.a, self.b)

    def _jet(self, x, n):
        x = np.asarray(x, dtype=float)
        g = (Jet.variable(x, n) - self.a) * (1.0 / (self.b - self.a))
        return self._step.psi_jet(g).derivatives()

    def __call__(self, x):
        out = self._jet(x, 0)[0]
        return out if out.ndim else float(out)

    def derivative(self, x, n: int = 1):
        out = self._jet(x, n)[n]
        return out if out.ndim else float(out)


def _check_nonneg(X):
    X = np.asarray(X, dtype=float)
    if np.any(X < 0) or np.any(np.isnan(X)):
        raise InputError("SRTF argument must satisfy X >= 0")
    return X


def srtf_f(X, s: SrtfParams):
    X = _check_nonneg(X)
    out = _srtf_jet(Jet.variable(X, 0), s).c[0]
    return out if out.ndim else float(out)


def srtf_derivatives(X, s: SrtfParams, order: int):
    """Array of d^n f/dX^n for n = 0..order (leading axis)."""
    X = _check_nonneg(X)
    return _srtf_jet(Jet.variable(X, order), s).derivatives()


def _srtf_jet(g: Jet, s: SrtfParams) -> Jet:
    x0 = g.c[0]
    if np.any(x0 < 0):
        raise InputError("SRTF argument must satisfy X >= 0")
    p = s.partition
    w = s.rise_width
    n = g.order
    idx = np.arange(n + 1).reshape((-1,) + (1,) * (g.c.ndim - 1))

    def at(mask, safe_value):
        # g with non-selected points moved to a harmless location
        return Jet(np.where(mask, g.c, np.where(idx == 0, safe_value, 0.0)))

    zeros = np.zeros_like(g.c)
    ones = np.where(idx == 0, 1.0, 0.0) * np.ones_like(g.c)
    result = zeros.copy()

    rise = (x0 > 0) & (x0 <= w)
    if np.any(rise):
        r = 1.0 - p.step_jet(at(rise, 0.5 * w) * (1.0 / w))
        result = np.where(rise, r.c, result)
    plateau = (x0 > w) & ((x0 <= 1) | s.alpha_limit)
    result = np.where(plateau, ones, result)
    if not s.alpha_limit:
        roll = (x0 > 1) & (x0 < s.x_max)
        if np.any(roll):
            gr = at(roll, 0.5 * (1 + s.x_max))
            hgt = (gr ** s.alpha) * s.mu2 - 1.0
            r = p.step_jet((gr - 1.0) / hgt)
            result = np.where(roll, r.c, result)
    return Jet(result)


def t_max(X, s: SrtfParams):
    """Upper bound mu2 * X^(alpha-1) of the t-integration (mu2 in the alpha -> 1 limit)."""
    X = np.asarray(X, dtype=float)
    if np.any(X <= 0):
        raise InputError("t_max needs X > 0")
    out = np.full(X.shape, s.mu2) if s.alpha_limit else s.mu2 * X ** (s.alpha - 1.0)
    return out if out.ndim else float(out)


def fourier_gamma_j(kfreq: float, j: int, p: PartitionParams,
                    cfg: QuadratureConfig | None = None) -> complex:
    """integral beta_j(x) exp(-i k x) dx over the cell's support."""
    cell = p.with_j(j)
    a, b = cell.support
    cfg = cfg or QuadratureConfig(rel_tol=1e-11, abs_tol=1e-13 * p.h)
    if cell.variant == NU_INTEGRAL:
        cuts = [j * p.h]
    else:
        cuts = [j * p.h + cell.eps, (j + 1) * p.h - cell.eps]
    est: QuadratureEstimate = integrate_1d(
        lambda x: elementary_u(x, cell) * np.exp(-1j * kfreq * x), a, b, cfg, breakpoints=cuts
    )
    return complex(est.value)
