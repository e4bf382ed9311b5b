"""Singular order, IR/UV extensions of radial distributions, BPHZ correspondence.

All distributions are radial and handled through the norm variable X with
pairing measure X^(d-1) dX on (0, inf).  Each extension is built as

    T~(X) = c * X^(a) * d^(k+1)/dX^(k+1) P(X)

with an explicit primitive P; ``evaluate`` differentiates P numerically and
``pair`` moves the derivatives onto the test function, which is the
distributional meaning of the extension near the origin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import IndeterminateOrderError, InputError, NonIntegrableError
from .lagrange import _check_k, _deriv
from .quadrature import QuadratureConfig, differentiate, gauss_legendre, integrate_1d
from .testfunc import Srtf, SrtfParams, t_max

__all__ = [
    "SingularDistribution",
    "ExtendedDistribution",
    "scaling_order",
    "extend_ir",
    "extend_ir_homogeneous",
    "extend_uv",
    "extend_uv_alt",
    "bphz_correspondence",
    "harmonic_number",
    "c_beta",
    "uv_log_integral",
    "builtin_distribution",
    "BUILTINS",
    "IR",
    "UV",
    "UV_ALT",
]

IR, UV, UV_ALT = "IR", "UV", "UV_alt"


@dataclass(frozen=True)
class SingularDistribution:
    """Radial distribution T(X) on X > 0 in ``d`` dimensions.

    ``homogeneity`` is the degree h with T(X/t) = t^(-h) T(X); ``uv_power``
    is omega with T ~ X^-(omega+1) at large X.
    """

    evaluate: Callable
    d: int = 1
    homogeneity: float | None = None
    uv_power: float | None = None
    name: str = "T"

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise InputError(f"d must be a positive integer, got {self.d}")
        if self.homogeneity is not None:
            xs = np.array([0.3, 1.0, 2.7])
            for t in (0.5, 3.0):
                lhs = np.asarray(self.evaluate(xs / t), dtype=float)
                rhs = t ** (-self.homogeneity) * np.asarray(self.evaluate(xs), dtype=float)
                if not np.allclose(lhs, rhs, rtol=1e-10, atol=0):
                    raise InputError(f"{self.name} is not homogeneous of degree {self.homogeneity}")

    def __call__(self, X):
        return self.evaluate(X)


def _fit_loglog(T: SingularDistribution, lo: float, hi: float, n: int = 50):
    lam = np.logspace(math.log10(lo), math.log10(hi), n)
    vals = np.abs(np.asarray(T.evaluate(lam), dtype=float))
    if np.any(~np.isfinite(vals)) or np.any(vals == 0):
        raise IndeterminateOrderError(f"{T.name} vanishes or is non-finite on the fit window")
    x, y = np.log(lam), np.log(vals)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return slope, r2


def scaling_order(T: SingularDistribution, regime: str = "ir", *, tol: float = 1e-2) -> int:
    """Singular order k from a log-log fit of |T| (50 points).

    IR (lambda in [1e-6, 1e-3]): T ~ lambda^-a gives k = ceil(a) - d, which is
    negative for locally integrable T.  Exponents within ``tol`` of an integer
    are snapped to it, absorbing subleading corrections inside the window.  UV (lambda in [1e3, 1e6]):
    T ~ X^-(omega+1) gives the least k >= 0 with k >= d - omega - 1.
    """
    regime = regime.lower()
    if regime == "ir":
        slope, r2 = _fit_loglog(T, 1e-6, 1e-3)
        a = -slope
        k = math.ceil(a - tol) - T.d
    elif regime == "uv":
        slope, r2 = _fit_loglog(T, 1e3, 1e6)
        omega = -slope - 1.0
        k = max(0, math.ceil(T.d - omega - 1 - tol))
    else:
        raise InputError(f"regime must be 'ir' or 'uv', got {regime!r}")
    if r2 < 0.999:
        raise IndeterminateOrderError(f"{T.name}: log-log fit R^2 = {r2:.6f} < 0.999")
    return int(k)


def harmonic_number(k: int) -> float:
    """H_k via the alternating binomial sum."""
    return math.fsum((-1) ** (p + 1) / p * math.comb(k, p) for p in range(1, k + 1))


def c_beta(T: SingularDistribution | Callable, k: int) -> float:
    """Sphere moment of T X^k on the d=1 'sphere' {-1, +1}; T is taken radial."""
    ev = T.evaluate if isinstance(T, SingularDistribution) else T
    t1 = float(ev(1.0))
    return t1 + (-1) ** k * t1


def _gl_panels(lo, hi, panels: int, order: int):
    """Composite Gauss-Legendre nodes/weights on [lo, hi] (arrays broadcast)."""
    u, w = gauss_legendre(order)
    lo = np.asarray(lo, dtype=float)[..., None]
    hi = np.asarray(hi, dtype=float)[..., None]
    edges = np.linspace(0.0, 1.0, panels + 1)
    s = (edges[:-1, None] + (edges[1:] - edges[:-1])[:, None] * u[None, :]).ravel()
    ws = ((edges[1:] - edges[:-1])[:, None] * w[None, :]).ravel()
    nodes = lo + (hi - lo) * s
    return nodes, (hi - lo) * ws


def _loop_scalar(fun, X):
    X = np.asarray(X, dtype=float)
    return np.vectorize(fun, otypes=[float])(X) if X.ndim else float(fun(float(X)))


@dataclass
class ExtendedDistribution:
    """Extended distribution T~ with its primitive and pairing.

    ``evaluate`` is defined for X > 0; ``primitive`` is the function whose
    (k+1)-th derivative, times ``prefactor * X^power``, gives T~.
    """

    primitive: Callable
    k: int
    mu2: float
    mode: str
    d: int
    prefactor: float
    power: float
    source: SingularDistribution
    upper: float = math.inf
    mu_tilde: float | None = None
    delta_coefficients: np.ndarray = field(default_factory=lambda: np.zeros(1))
    tail: Callable | None = None
    closed_form: Callable | None = None

    def evaluate(self, X):
        X = np.asarray(X, dtype=float)
        if np.any(X <= 0):
            raise InputError("T~ is evaluated pointwise for X > 0 only; X = 0 enters through pair()")
        if self.closed_form is not None:
            out = np.asarray(self.closed_form(X), dtype=float)
        else:
            inside = X < self.upper
            xin = np.where(inside, X, 0.5 * self.upper if math.isfinite(self.upper) else 1.0)
            lower = 0.0
            upper = self.upper if math.isfinite(self.upper) else None
            dn = differentiate(self.primitive, xin, self.k + 1, lower=lower, upper=upper)
            out = self.prefactor * xin ** self.power * dn
            if self.tail is not None:
                out = np.where(inside, out, self.tail(np.where(inside, 1.0, X)))
            else:
                out = np.where(inside, out, 0.0)
        return out if out.ndim else float(out)

    __call__ = evaluate

    def pair(self, phi: Callable | None = None, cfg: QuadratureConfig | None = None,
             *, support: tuple[float, float] | None = None) -> float:
        """<T~, phi> with measure X^(d-1) dX (phi = 1 by default, UV modes)."""
        cfg = cfg or QuadratureConfig(rel_tol=1e-9, abs_tol=1e-13)
        if self.mode == IR:
            return self._pair_ir(phi, cfg, support)
        lo, hi = (0.0, math.inf) if support is None else support
        hi = min(hi, self.upper) if self.tail is None else hi

        if phi is None:
            def integrand(X):
                return self.evaluate(X) * X ** (self.d - 1)
        else:
            def integrand(X):
                return self.evaluate(X) * np.asarray(phi(X)) * X ** (self.d - 1)
        cuts = [c for c in (1.0, self.upper) if lo < c < hi and math.isfinite(c)]
        est = integrate_1d(integrand, lo, hi, cfg, breakpoints=cuts)
        est.require(f"pairing of {self.source.name} extension")
        return float(np.real(est.value))

    def _pair_ir(self, phi, cfg, support):
        if phi is None:
            raise InputError("IR pairing needs a test function")
        lo, hi = support if support is not None else getattr(phi, "support", (0.0, math.inf))
        if hi > self.upper * (1 + 1e-12):
            raise InputError(
                f"test function support [{lo}, {hi}] leaves the IR patch [0, {self.upper}); "
                "lower mu_tilde or shrink the support"
            )
        n = self.k + 1
        sign = (-1) ** n

        def integrand(X):
            X = np.asarray(X, dtype=float)
            return self.primitive(X) * _deriv(phi, X, n)

        cuts = []
        params = getattr(phi, "params", None)
        if params is not None:
            cuts = [c for c in (params.rise_width, 1.0) if lo < c < hi]
        est = integrate_1d(integrand, max(lo, 0.0), hi, cfg, breakpoints=cuts)
        est.require("IR pairing")
        value = self.prefactor * sign * float(np.real(est.value))
        for j, coeff in enumerate(self.delta_coefficients):
            if coeff:
                value += coeff * (-1) ** j * float(_deriv(phi, 0.0, j))
        return value


def _homogeneous_ok(T: SingularDistribution, degree: float) -> bool:
    xs = np.array([0.2, 0.7, 1.9])
    for t in (0.4, 2.5):
        if not np.allclose(np.asarray(T.evaluate(xs / t)), t ** (-degree) * np.asarray(T.evaluate(xs)),
                           rtol=1e-10, atol=0):
            return False
    return True


def extend_ir(T: SingularDistribution, k: int, mu_tilde: float, *, lower_bound: str = "refined",
              mu2: float | None = None) -> ExtendedDistribution:
    """IR extension on the patch X < 1/mu_tilde.

    T~(X) = (-1)^(k+1) (k+1)/(k+1)! X^(1-d) d^(k+1)/dX^(k+1)
            [ X^(k+d) integral_{tau(X)}^1 (1-t)^k / t^(k+d+1) T(X/t) dt ]

    with tau(X) = mu_tilde X (``lower_bound="refined"``) or the fixed
    1/mu2 (``"coarse"``, as used for causal splitting).  After u = X/t the
    primitive is integral_X^{X/tau} (u-X)^k u^(d-1) T(u) du, which is what
    gets integrated.
    """
    k = _check_k(k)
    if not 0 < mu_tilde < 1:
        raise InputError(f"mu_tilde must lie in (0, 1), got {mu_tilde}")
    d = T.d
    if lower_bound == "refined":
        upper = 1.0 / mu_tilde

        def ulim(X):
            return np.full_like(X, upper)
    elif lower_bound == "coarse":
        if mu2 is None or mu2 <= 1:
            raise InputError("coarse lower bound needs mu2 > 1")
        upper = math.inf

        def ulim(X):
            return X * mu2
    else:
        raise InputError(f"lower_bound must be 'refined' or 'coarse', got {lower_bound!r}")

    def primitive(X):
        X = np.asarray(X, dtype=float)
        xs = np.clip(X, 1e-300, None)
        top = np.maximum(ulim(xs), xs)
        # log-spaced nodes resolve the u^-(k+d) growth towards small u
        s, ws = _gl_panels(np.log(xs), np.log(top), 24, 16)
        u = np.exp(s)
        vals = (u - xs[..., None]) ** k * u ** d * np.asarray(T.evaluate(u), dtype=float)
        out = np.sum(vals * ws, axis=-1)
        return out if out.ndim else float(out)

    pref = (-1) ** (k + 1) * (k + 1) / math.factorial(k + 1)
    return ExtendedDistribution(
        primitive=primitive, k=k, mu2=float(mu2) if mu2 else 1.0 / mu_tilde ** 2, mode=IR, d=d,
        prefactor=pref, power=1 - d, source=T, upper=upper, mu_tilde=mu_tilde,
        delta_coefficients=np.zeros(k + 1), tail=T.evaluate,
    )


def extend_ir_homogeneous(T: SingularDistribution, k: int, mu_tilde: float):
    """Closed form of the IR extension for T(X/t) = t^(k+d) T(X).

    Returns ``(ext, delta)``: ``ext.evaluate`` is the smooth part
    (-1)^k (k+1)/(k+1)! X^(1-d) d^(k+1)[X^(k+d) T(X) log(mu_tilde X)], and
    ``delta`` the origin coefficient (-1)^k/k! H_k C^beta (d = 1 moment).
    """
    k = _check_k(k)
    d = T.d
    degree = -(k + d)
    if not _homogeneous_ok(T, degree):
        raise InputError(f"{T.name} is not homogeneous of degree {degree}")
    t1 = float(T.evaluate(1.0))
    # X^(k+d) T(X) = T(1) along the ray, and d^(k+1) log X = (-1)^k k!/X^(k+1)
    pref = (-1) ** k * (k + 1) / math.factorial(k + 1)

    def smooth(X):
        return pref * X ** (1 - d) * t1 * (-1) ** k * math.factorial(k) / X ** (k + 1)

    def primitive(X):
        return t1 * np.log(mu_tilde * np.asarray(X, dtype=float))

    delta = (-1) ** k / math.factorial(k) * harmonic_number(k) * c_beta(T, k)
    coeffs = np.zeros(k + 1)
    coeffs[k] = delta
    ext = ExtendedDistribution(
        primitive=primitive, k=k, mu2=1.0 / mu_tilde ** 2, mode=IR, d=d, prefactor=pref,
        power=1 - d, source=T, upper=1.0 / mu_tilde, mu_tilde=mu_tilde,
        delta_coefficients=coeffs, tail=T.evaluate, closed_form=smooth,
    )
    return ext, delta


def uv_log_integral(tmax, k: int):
    """G = integral_1^tmax (1-t)^k / t dt, zero when tmax <= 1."""
    tm = np.asarray(tmax, dtype=float)
    safe = np.maximum(tm, 1.0)
    g = np.log(safe)
    for j in range(1, k + 1):
        g = g + math.comb(k, j) * (-1) ** j * (safe ** j - 1.0) / j
    out = np.where(tm > 1.0, g, 0.0)
    return out if out.ndim else float(out)


def _check_uv_order(T: SingularDistribution, k: int):
    omega = T.uv_power
    if omega is None:
        slope, _ = _fit_loglog(T, 1e3, 1e6)
        omega = -slope - 1.0
    if k < T.d - omega - 1 - 1e-9:
        raise NonIntegrableError(f"k={k} < d - omega - 1 = {T.d - omega - 1:g}; extension is not integrable")


def extend_uv(T: SingularDistribution, k: int, s: SrtfParams) -> ExtendedDistribution:
    """UV extension (-1)^k/k! X^(k-d+1) d^(k+1)/dX^(k+1) [X^d T(X) G(X)].

    G is ``uv_log_integral`` of t_max(X); in the alpha -> 1 limit it is the
    constant G(mu2) and the X-range is [0, inf).
    """
    k = _check_k(k)
    _check_uv_order(T, k)
    d = T.d

    def primitive(X):
        X = np.asarray(X, dtype=float)
        G = uv_log_integral(t_max(np.clip(X, 1e-300, None), s), k)
        return X ** d * np.asarray(T.evaluate(X), dtype=float) * G

    return ExtendedDistribution(
        primitive=primitive, k=k, mu2=s.mu2, mode=UV, d=d,
        prefactor=(-1) ** k / math.factorial(k), power=k - d + 1, source=T, upper=s.x_max,
    )


def extend_uv_alt(T: SingularDistribution, k: int, d: int | None, mu2: float) -> ExtendedDistribution:
    """Alternative UV form with T(X/t) under the t-integral.

    (-1)^k/k! X^(k-d+1) d^(k+1)/dX^(k+1) [X^d integral_1^mu2 (1-t)^k/t^(d+1) T(X/t) dt]
    """
    k = _check_k(k)
    d = T.d if d is None else int(d)
    if mu2 < 1:
        raise InputError("mu2 must be >= 1")
    _check_uv_order(SingularDistribution(T.evaluate, d, None, T.uv_power, T.name), k)
    panels = max(4, int(math.ceil(2 * math.log(mu2))) + 2) if mu2 > 1 else 1

    def primitive(X):
        X = np.asarray(X, dtype=float)
        if mu2 == 1:
            return np.zeros_like(X) if X.ndim else 0.0
        sl, ws = _gl_panels(0.0, math.log(mu2), panels, 24)
        t = np.exp(sl)
        vals = (1 - t) ** k / t ** d * np.asarray(T.evaluate(X[..., None] / t), dtype=float)
        out = X ** d * np.sum(vals * ws, axis=-1)
        return out if np.ndim(out) else float(out)

    return ExtendedDistribution(
        primitive=primitive, k=k, mu2=mu2, mode=UV_ALT, d=d,
        prefactor=(-1) ** k / math.factorial(k), power=k - d + 1, source=T,
    )


# -- BPHZ correspondence -------------------------------------------------------

_SQRT2PI = math.sqrt(2 * math.pi)


def _fourier(T, p, cfg):
    """(2 pi)^(-1/2) integral T(X) exp(-i p X) dX over the real line (T even, radial)."""
    est = integrate_1d(lambda x: np.asarray(T(np.abs(x))) * np.cos(p * x), 0.0, math.inf, cfg)
    est.require("Fourier transform")
    return 2.0 * float(est.value) / _SQRT2PI


def bphz_correspondence(T: SingularDistribution | Callable, f: Srtf | None, k: int, q: float = 0.0,
                        p: float | None = None, cfg: QuadratureConfig | None = None) -> tuple:
    """Compare the position-space subtraction with the momentum-space k-jet subtraction.

    Pointwise mode (``p`` given, T regular and integrable on the line):
    returns (F[T~](p), F[T](p) - sum_{n<=k} (p-q)^n/n! F[T]^(n)(q)), where T~
    subtracts the modulated jet e^(-iqX) sum (-i(p-q)X)^n/n! from e^(-ipX).

    Pairing mode (``p`` None, T = 1/|X| in one dimension, k = 0, q = 0):
    returns (<T~, f>, <R F[T], F^-1 f>) with f an SRTF made even in X.
    """
    k = _check_k(k)
    cfg = cfg or QuadratureConfig(rel_tol=1e-10, abs_tol=1e-13)
    ev = T.evaluate if isinstance(T, SingularDistribution) else T
    if p is not None:
        return _bphz_pointwise(ev, k, q, p, cfg)
    if f is None:
        raise InputError("pairing mode needs an SRTF")
    if k != 0 or q != 0:
        raise InputError("pairing mode is implemented for k = 0, q = 0")
    return _bphz_pairing(ev, f, cfg)


def _bphz_pointwise(ev, k, q, p, cfg):
    def integrand(x):
        x = np.asarray(x, dtype=float)
        jet = sum((-1j * (p - q) * x) ** n / math.factorial(n) for n in range(k + 1))
        return np.asarray(ev(np.abs(x))) * (np.exp(-1j * p * x) - np.exp(-1j * q * x) * jet)

    est = integrate_1d(integrand, -math.inf, math.inf, cfg)
    est.require("position-space subtraction")
    lhs = complex(est.value) / _SQRT2PI

    def ft(pp):
        return _loop_scalar(lambda v: _fourier(ev, v, cfg), pp)

    rhs = _fourier(ev, p, cfg)
    for n in range(k + 1):
        dn = ft(q) if n == 0 else differentiate(ft, q, n, step=0.25)
        rhs -= (p - q) ** n / math.factorial(n) * dn
    return (lhs.real if abs(lhs.imag) < 1e-12 else lhs), rhs


def _bphz_pairing(ev, f: Srtf, cfg):
    # sanity: this branch needs T = 1/|X|
    if not np.allclose(np.asarray(ev(np.array([0.5, 2.0]))), [2.0, 0.5], rtol=1e-12):
        raise InputError("pairing mode supports T = 1/|X| only")
    lo, hi = f.support
    cuts = [c for c in (f.params.rise_width, 1.0) if lo < c < hi]
    lhs_est = integrate_1d(lambda x: f(x) / x, lo, hi, cfg, breakpoints=cuts)
    lhs_est.require("position pairing")
    lhs = 2.0 * float(lhs_est.value)

    # cosine transform C(p) = integral_0^Xmax f(X) cos(pX) dX on a fixed fine rule
    xs, wx = _gl_panels(lo, hi, 400, 16)
    fx = f(xs) * wx

    def cosine(pp):
        pp = np.asarray(pp, dtype=float)
        return np.cos(pp[..., None] * xs) @ fx

    # F[1/|X|](p) = -sqrt(2/pi) log|p| + const; constants drop since f(0) = 0
    pmax = 60.0 / max(f.params.rise_width, 1e-3)
    est = integrate_1d(lambda pp: np.log(pp) * cosine(pp), 0.0, pmax,
                       cfg.replace(max_subdivisions=4000),
                       breakpoints=list(np.linspace(0, pmax, 200)[1:-1]))
    est.require("momentum pairing")
    rhs = -4.0 / math.pi * float(est.value)
    return lhs, rhs


# -- named distributions for the CLI and the tests ----------------------------

def _inv_x(X):
    return 1.0 / np.asarray(X, dtype=float)


def _inv_x2(X):
    return 1.0 / np.asarray(X, dtype=float) ** 2


def _prop(X):
    return 1.0 / (np.asarray(X, dtype=float) + 1.0)


def _inv_omega(X):
    X = np.asarray(X, dtype=float)
    return 1.0 / np.sqrt(X * X + 1.0)


BUILTINS = {
    "inv_x": lambda: SingularDistribution(_inv_x, 1, homogeneity=-1.0, name="inv_x"),
    "inv_x2": lambda: SingularDistribution(_inv_x2, 1, homogeneity=-2.0, name="inv_x2"),
    # X = p^2/Lambda^2 with Lambda = m, so T = 1/(X + 1)
    "euclid_prop_d2": lambda: SingularDistribution(_prop, 1, uv_power=0.0, name="euclid_prop_d2"),
    "euclid_prop_d4": lambda: SingularDistribution(_prop, 2, uv_power=0.0, name="euclid_prop_d4"),
    # X = |p|/m, T = 1/omega_p in units of m
    "inv_omega": lambda: SingularDistribution(_inv_omega, 1, uv_power=0.0, name="inv_omega"),
}


def builtin_distribution(name: str) -> SingularDistribution:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise InputError(f"unknown distribution {name!r}; choose from {sorted(BUILTINS)}") from None
