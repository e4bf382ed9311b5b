"""Taylor-jet subtraction and Lagrange integral remainders (radial 1D forms).

For a radial argument every multi-index sum collapses to one derivative
along the ray, e.g.

    sum_{|b|=n} (n) X^b/b! d^b f(tX)  ->  X^n/(n-1)! f^(n)(tX).

Derivatives come from ``f.derivative(x, n)`` when the callable offers it
(``Srtf`` does, exactly) and from ``quadrature.differentiate`` otherwise.
"""
from __future__ import annotations

import math

import numpy as np

from ._jets import Jet
from .errors import InputError, UnsupportedOrderError
from .quadrature import QuadratureConfig, differentiate
from .quadrature import integrate_1d_scaled as integrate_1d

__all__ = [
    "taylor_remainder_direct",
    "lagrange_remainder_ir",
    "lagrange_uv",
    "lagrange_uv_inverted",
    "lagrange_v1",
    "lagrange_alt_check",
    "MAX_ORDER",
]

MAX_ORDER = 4
# integrands are O(1) derivatives that cancel to small results; a pure
# relative target would chase roundoff
DEFAULT_CFG = QuadratureConfig(rel_tol=1e-9, abs_tol=1e-12, max_subdivisions=1000)


def _check_k(k: int) -> int:
    if int(k) != k or k < 0:
        raise InputError(f"k must be a non-negative integer, got {k}")
    if k > MAX_ORDER:
        raise UnsupportedOrderError(f"k={k} exceeds the supported maximum {MAX_ORDER}")
    return int(k)


def _deriv(f, x, n: int):
    if n == 0:
        return np.asarray(f(x), dtype=float)
    if hasattr(f, "derivative"):
        return np.asarray(f.derivative(x, n), dtype=float)
    return np.asarray(differentiate(f, np.asarray(x, dtype=float), n))


def _knots(f):
    """Points where an SRTF changes branch (the integrands kink there numerically)."""
    params = getattr(f, "params", None)
    if params is None:
        return ()
    pts = [params.rise_width, 1.0]
    if math.isfinite(params.x_max):
        pts.append(params.x_max)
    return tuple(pts)


def _outer_edge(f) -> float:
    support = getattr(f, "support", None)
    return float(support[1]) if support is not None else math.inf


def _all_derivs(f, u, n: int):
    """[f(u), f'(u), ..., f^(n)(u)], from one jet when f provides it."""
    if hasattr(f, "jet"):
        return f.jet(Jet.variable(u, n)).derivatives()
    return [_deriv(f, u, m) for m in range(n + 1)]


def _dn_power_times_f(f, X: float, t, power: int, n: int):
    """d^n/dX^n [X^power f(X t)] for an array of t > 0.

    Written as t^(n-power) h^(n)(X t) with h(u) = u^power f(u): Leibniz in u
    keeps every term bounded by the support, where Leibniz in X at fixed t
    would pile up powers of t that cancel.
    """
    t = np.asarray(t, dtype=float)
    u = X * t
    ders = _all_derivs(f, u, n)
    h = np.zeros_like(u)
    for m in range(n + 1):
        j = n - m
        if j > power:
            continue
        h = h + math.comb(n, m) * math.factorial(power) / math.factorial(power - j) * u ** (power - j) * ders[m]
    return t ** (n - power) * h


def _require(est, strict: bool, what: str):
    return est.require(what) if strict else est


def taylor_remainder_direct(f, X: float, k: int) -> float:
    """f(X) minus its k-jet at the origin."""
    k = _check_k(k)
    jet = sum(X ** n / math.factorial(n) * float(_deriv(f, 0.0, n)) for n in range(k + 1))
    return float(f(X)) - jet


def lagrange_remainder_ir(f, X: float, k: int, cfg: QuadratureConfig | None = None,
                          *, strict: bool = True) -> float:
    """X^(k+1)/k! * integral_0^1 (1-t)^k f^(k+1)(tX) dt."""
    k = _check_k(k)
    cfg = cfg or DEFAULT_CFG
    if X == 0:
        return 0.0
    cuts = [c / X for c in _knots(f) if 0 < c / X < 1]
    est = integrate_1d(lambda t: (1 - t) ** k * _deriv(f, X * t, k + 1), 0.0, 1.0, cfg, breakpoints=cuts)
    _require(est, strict, "IR Lagrange remainder")
    return X ** (k + 1) / math.factorial(k) * float(np.real(est.value))


def lagrange_uv(f, X: float, k: int, cfg: QuadratureConfig | None = None,
                *, strict: bool = True) -> float:
    """-(X/k!) * integral_1^inf (dt/t) (1-t)^k d^(k+1)/dX^(k+1) [X^k f(Xt)].

    The t-range stops where f(Xt) leaves its support, at X_max/X.
    """
    k = _check_k(k)
    cfg = cfg or DEFAULT_CFG
    if X <= 0:
        raise InputError("lagrange_uv needs X > 0")
    upper = _outer_edge(f) / X
    if upper <= 1:
        return 0.0
    cuts = [c / X for c in _knots(f) if 1 < c / X < upper]

    def integrand(t):
        return (1 - t) ** k / t * _dn_power_times_f(f, X, t, k, k + 1)

    est = integrate_1d(integrand, 1.0, upper, cfg, breakpoints=cuts)
    _require(est, strict, "UV Lagrange form")
    return -X / math.factorial(k) * float(np.real(est.value))


def _d1(f, p, k, cfg, strict):
    upper = _outer_edge(f) / p
    if upper <= 1:
        return 0.0
    cuts = [c / p for c in _knots(f) if 1 < c / p < upper]
    est = integrate_1d(lambda t: (1 - t) ** k * _deriv(f, p * t, k + 1), 1.0, upper, cfg, breakpoints=cuts)
    _require(est, strict, "first alternative form")
    return -p ** (k + 1) / math.factorial(k) * float(np.real(est.value))


def _d2(f, p, k, d, cfg, strict):
    upper = _outer_edge(f) / p
    if upper <= 1:
        return 0.0
    cuts = [c / p for c in _knots(f) if 1 < c / p < upper]

    def integrand(t):
        return (1 - t) ** k * t ** (d - 1) * _dn_power_times_f(f, p, t, k + d, k + 1)

    est = integrate_1d(integrand, 1.0, upper, cfg, breakpoints=cuts)
    _require(est, strict, "second alternative form")
    return -p ** (1 - d) / math.factorial(k) * float(np.real(est.value))


def lagrange_alt_check(f, p: float, k: int, d: int, cfg: QuadratureConfig | None = None,
                       *, strict: bool = True) -> tuple[float, float]:
    """Evaluate both [1, inf) representations of f(p) in d dimensions; each should equal f(p).

    First: -p^(k+1)/k! integral (1-t)^k f^(k+1)(pt) dt.
    Second: -p^(1-d)/k! integral (1-t)^k t^(d-1) d^(k+1)/dp^(k+1) [p^(k+d) f(pt)] dt.
    """
    k = _check_k(k)
    if int(d) != d or d < 1:
        raise InputError(f"d must be a positive integer, got {d}")
    if p <= 0:
        raise InputError("p must be positive")
    cfg = cfg or DEFAULT_CFG
    return _d1(f, p, k, cfg, strict), _d2(f, p, k, int(d), cfg, strict)


def lagrange_uv_inverted(f, p: float, k: int, cfg: QuadratureConfig | None = None,
                         *, strict: bool = True) -> float:
    """The [1, inf) form after t -> 1/s, as an integral over (0, 1]."""
    k = _check_k(k)
    cfg = cfg or DEFAULT_CFG
    if p <= 0:
        raise InputError("p must be positive")
    lower = p / _outer_edge(f)
    if lower >= 1:
        return 0.0
    cuts = [p / c for c in _knots(f) if lower < p / c < 1]

    def integrand(s):
        return (s - 1) ** k / s ** (k + 2) * _deriv(f, p / s, k + 1)

    est = integrate_1d(integrand, lower, 1.0, cfg, breakpoints=cuts)
    _require(est, strict, "inverted UV form")
    return -p ** (k + 1) / math.factorial(k) * float(np.real(est.value))


def lagrange_v1(f, X: float, omega: int, cfg: QuadratureConfig | None = None,
                *, strict: bool = True) -> float:
    """X^(w+1)/w! integral_0^1 (1-t)^w / t^(w+1) d^(w+1)/dX^(w+1) [f(Xt)] dt.

    The X-derivative of f(Xt) produces t^(w+1), which cancels the measure's
    pole; the result coincides with ``lagrange_remainder_ir``.
    """
    omega = _check_k(omega)
    cfg = cfg or DEFAULT_CFG
    if X == 0:
        return 0.0
    cuts = [c / X for c in _knots(f) if 0 < c / X < 1]

    def integrand(t):
        return (1 - t) ** omega / t ** (omega + 1) * t ** (omega + 1) * _deriv(f, X * t, omega + 1)

    est = integrate_1d(integrand, 0.0, 1.0, cfg, breakpoints=cuts)
    _require(est, strict, "dispersion-form Lagrange identity")
    return X ** (omega + 1) / math.factorial(omega) * float(np.real(est.value))
