"""Causal splitting in the reduced frame and the subtracted dispersion relation.

The retarded extension of a model Fourier transform Tbar with subtraction
order w is

    (i/2pi) b^(w+1) integral ds Tbar(sp) / [(s - a - i0)^(w+1) (1 - s + i0)],

with a = 1/mu^2 and b = 1 - a; the advanced one flips both i0.  Both poles
are handled by exact Plemelj bookkeeping: a window of half-width b/3 around
each pole is Taylor-subtracted analytically (the subtracted pieces integrate
in closed form, the i0 survives only in the simple-pole term) and the smooth
remainder is integrated in its Lagrange-integral form so nothing cancels
numerically.  Taylor coefficients of Tbar come from jets, so every model in
the corpus is differentiated exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._jets import Jet
from .errors import ConvergenceError, InputError, NonIntegrableError, UnsupportedOrderError
from .quadrature import QuadratureConfig, gauss_legendre, integrate_1d, integrate_pv

__all__ = [
    "CausalModelDistribution",
    "SplitResult",
    "ThetaVFourier",
    "MODELS",
    "model_distribution",
    "theta_v_fourier",
    "smeared_theta_check",
    "t_integral_closed",
    "dispersion_constants",
    "retarded_extension",
    "advanced_extension",
    "taylor_route_difference",
    "splitting_difference_check",
]

MAX_OMEGA = 4
DEFAULT_CFG = QuadratureConfig(rel_tol=1e-10, abs_tol=1e-13, max_subdivisions=1000)
_U_NODES, _U_WEIGHTS = gauss_legendre(24)


def _jet_exp(x: Jet) -> Jet:
    return x.exp()


@dataclass(frozen=True)
class CausalModelDistribution:
    """A smooth model Tbar(p) with its subtraction order.

    ``expr`` maps a Jet in p to a Jet of Tbar, which gives values and exact
    derivatives from one definition.
    """

    expr: Callable[[Jet], Jet]
    omega: int = 0
    name: str = "custom"

    def __post_init__(self):
        if int(self.omega) != self.omega or self.omega < 0:
            raise InputError(f"omega must be a non-negative integer, got {self.omega}")
        if self.omega > MAX_OMEGA:
            raise UnsupportedOrderError(f"omega={self.omega} exceeds the supported maximum {MAX_OMEGA}")

    def jet(self, p, order: int) -> Jet:
        return self.expr(Jet.variable(p, order))

    def __call__(self, p):
        out = self.jet(np.asarray(p, dtype=float), 0).c[0]
        return float(out) if np.ndim(out) == 0 else out

    def derivative(self, p, n: int):
        out = self.jet(np.asarray(p, dtype=float), n).derivatives()[n]
        return float(out) if np.ndim(out) == 0 else out

    def with_omega(self, omega: int) -> "CausalModelDistribution":
        return CausalModelDistribution(self.expr, omega, self.name)


def _gaussian(x: Jet) -> Jet:
    return _jet_exp(-(x * x))


def _lorentzian(x: Jet) -> Jet:
    return 1.0 / (1.0 + x * x)


def _polyrational(degree: int):
    def expr(x: Jet) -> Jet:
        poly = 1.0 + 0.0 * x
        for _ in range(degree):
            poly = poly * (1.0 + x)
        return poly * (2.0 + x * x) / (1.0 + x * x)
    return expr


def _zero(x: Jet) -> Jet:
    return 0.0 * x


MODELS = ("gaussian", "lorentzian", "polyrational", "zero")


def model_distribution(name: str, omega: int | None = None, degree: int = 0) -> CausalModelDistribution:
    """Corpus models: exp(-p^2), 1/(1+p^2), (1+p)^degree (2+p^2)/(1+p^2), and 0.

    ``polyrational`` grows like |p|^degree and defaults to omega = degree.
    """
    if name == "gaussian":
        expr = _gaussian
    elif name == "lorentzian":
        expr = _lorentzian
    elif name == "polyrational":
        if degree not in (0, 1, 2):
            raise InputError(f"polyrational degree must be 0, 1 or 2, got {degree}")
        expr = _polyrational(degree)
        name = f"polyrational{degree}"
    elif name == "zero":
        expr = _zero
    else:
        raise InputError(f"unknown model {name!r}; choose from {MODELS}")
    if omega is None:
        omega = degree if expr is not _gaussian and expr is not _lorentzian and expr is not _zero else 0
    return CausalModelDistribution(expr, int(omega), name)


@dataclass(frozen=True)
class SplitResult:
    retarded: complex
    advanced: complex
    difference: complex
    bphz_remainder: complex

    @property
    def gap(self) -> float:
        return abs(self.difference - self.bphz_remainder)

    def to_dict(self) -> dict:
        def c(z):
            return [float(np.real(z)), float(np.imag(z))]
        return {"retarded": c(self.retarded), "advanced": c(self.advanced),
                "difference": c(self.difference), "bphz_remainder": c(self.bphz_remainder),
                "gap": self.gap}


# -- theta_v in the reduced frame ---------------------------------------------------

@dataclass(frozen=True)
class ThetaVFourier:
    """(2pi)^(D/2-1) i/(p0 + i0) times delta^(D-1)(p_vec - p0 v_vec).

    The spatial delta only pins p_vec to p0 v_vec; v never enters the
    coefficient, which is what makes reduced-frame results v-independent.
    """

    D: int
    p0: float
    prefactor: float
    constraint: str = "p_vec = p0 * v_vec (p_vec parallel to v_vec)"

    def kernel(self, eps: float) -> complex:
        """The coefficient at finite eps > 0."""
        return self.prefactor * 1j / (self.p0 + 1j * eps)

    @property
    def pv_coefficient(self) -> complex:
        """Weight of PV 1/p0 in the Plemelj split."""
        return 1j * self.prefactor

    @property
    def delta_coefficient(self) -> float:
        """Weight of delta(p0) in the Plemelj split."""
        return math.pi * self.prefactor


def theta_v_fourier(p0: float, D: int, v=None) -> ThetaVFourier:
    if int(D) != D or D < 1:
        raise InputError(f"D must be a positive integer, got {D}")
    if v is not None:
        v = np.atleast_1d(np.asarray(v, dtype=float))
        if v.shape != (int(D) - 1,):
            raise InputError(f"v must have {int(D) - 1} spatial components")
        if not np.linalg.norm(v) < 1:
            raise InputError("v must be timelike: |v| < 1")
    return ThetaVFourier(int(D), float(p0), (2 * math.pi) ** (D / 2 - 1))


def smeared_theta_check(p0: float, sigma: float = 1.0,
                        cfg: QuadratureConfig | None = None) -> tuple[complex, complex]:
    """Pair theta with a Gaussian two ways.

    Direct: integral_0^inf exp(-t^2/(2 sigma^2)) e^(i p0 t) dt.
    Distributional: (1/2pi) integral dq ghat(q) i/(p0 - q + i0), evaluated
    as a principal value plus the delta term, with ghat the Fourier
    transform of the Gaussian.
    """
    if sigma <= 0:
        raise InputError("sigma must be positive")
    cfg = cfg or DEFAULT_CFG

    def g(t):
        return np.exp(-0.5 * (t / sigma) ** 2)

    re = integrate_1d(lambda t: g(t) * np.cos(p0 * t), 0.0, math.inf, cfg).require("smeared theta (cos)")
    im = integrate_1d(lambda t: g(t) * np.sin(p0 * t), 0.0, math.inf, cfg).require("smeared theta (sin)")
    direct = complex(re.value, im.value)

    def ghat(q):
        return sigma * math.sqrt(2 * math.pi) * np.exp(-0.5 * (sigma * q) ** 2)

    reach = abs(p0) + 40.0 / sigma
    pv = integrate_pv(ghat, p0, -reach, reach, cfg).require("smeared theta principal value")
    # PV of ghat/(p0 - q) is minus the PV of ghat/(q - p0)
    distributional = (1j * -pv.value + math.pi * ghat(p0)) / (2 * math.pi)
    return direct, complex(distributional)


# -- the t-integral behind the dispersion form ---------------------------------------

def t_integral_closed(p0: float, k0: float, omega: int, mu2: float, *, eps_sign: int = 1,
                      cfg: QuadratureConfig | None = None) -> tuple[float, float]:
    """(integral_{1/mu^2}^1 (1-t)^w / (p0 t - k0 + i0)^(w+2) dt, closed form).

    When the pole t = k0/p0 falls inside the range the integral is taken on a
    half-circle contour on the side the i0 prescription allows; the result is
    real because the polynomial numerator is annihilated by the (w+1)-st
    derivative that the delta part would carry.
    """
    if int(omega) != omega or omega < 0:
        raise InputError(f"omega must be a non-negative integer, got {omega}")
    if mu2 < 1:
        raise InputError("mu2 must be >= 1")
    cfg = cfg or DEFAULT_CFG
    w, n = int(omega), int(omega) + 1
    a = 1.0 / mu2
    if mu2 == 1:
        return 0.0, 0.0
    den1, den2 = p0 - k0, p0 - k0 * mu2
    if den1 == 0 or den2 == 0:
        raise InputError("the pole sits on an endpoint of the t-range; both sides diverge")
    closed = (mu2 - 1) ** n / (n * den1 * den2 ** n)

    pole = k0 / p0 if p0 != 0 else math.inf
    if not (a < pole < 1):
        est = integrate_1d(lambda t: (1 - t) ** w / (p0 * t - k0) ** (w + 2), a, 1.0, cfg)
        return float(est.require("t-integral").value), float(closed)

    mid, half = 0.5 * (1 + a), 0.5 * (1 - a)
    side = math.copysign(1.0, p0) * eps_sign

    def on_arc(theta):
        t = mid - half * np.cos(theta) + 1j * side * half * np.sin(theta)
        dt = half * np.sin(theta) + 1j * side * half * np.cos(theta)
        return (1 - t) ** w / (p0 * t - k0) ** (w + 2) * dt

    est = integrate_1d(on_arc, 0.0, math.pi, cfg).require("t-integral on the deformed contour")
    return float(np.real(est.value)), float(closed)


# -- retarded and advanced extensions ---------------------------------------------

def dispersion_constants(mu2: float, omega: int) -> tuple[float, float]:
    """(prefactor ((mu^2-1)/mu^2)^(w+1), subtraction point fraction 1/mu^2)."""
    if not mu2 > 1:
        raise InputError("mu2 must exceed 1")
    return ((mu2 - 1) / mu2) ** (omega + 1), 1.0 / mu2


def _growth_exponent(Tm: CausalModelDistribution, p: float) -> float:
    scale = 1e5 * max(1.0, 1.0 / abs(p)) if p != 0 else None
    if scale is None:
        return 0.0
    worst = -math.inf
    for sgn in (1.0, -1.0):
        v1 = abs(Tm(sgn * scale * p))
        v2 = abs(Tm(sgn * 10 * scale * p))
        if v1 == 0 or v2 == 0:
            continue
        worst = max(worst, math.log10(v2 / v1))
    return worst


def _check_tail(Tm: CausalModelDistribution, p: float):
    growth = _growth_exponent(Tm, p)
    # integrand ~ s^(growth - w - 2); integrable iff growth < w + 1
    if growth > Tm.omega + 0.5:
        raise NonIntegrableError(
            f"model {Tm.name!r} grows like |p|^{growth:.2f}; omega={Tm.omega} gives "
            f"{Tm.omega + 1} subtractions, which needs growth at most |p|^{Tm.omega}"
        )


def _extension(Tm: CausalModelDistribution, p: float, mu2: float, sign: int,
               cfg: QuadratureConfig | None) -> complex:
    cfg = cfg or DEFAULT_CFG
    n = Tm.omega + 1
    prefactor, a = dispersion_constants(mu2, Tm.omega)
    b = 1.0 - a
    r = b / 3.0
    _check_tail(Tm, p)

    def g_jet(s, order):
        return Tm.expr(Jet.variable(s, order) * p)

    def outer(s):
        s = np.asarray(s, dtype=float)
        return g_jet(s, 0).c[0] / ((s - a) ** n * (1 - s))

    total = 0.0
    for lo, hi in ((-math.inf, a - r), (a + r, 1 - r), (1 + r, math.inf)):
        est = integrate_1d(outer, lo, hi, cfg)
        if not est.converged:
            raise ConvergenceError(
                f"dispersion integral over [{lo}, {hi}] did not converge (error {est.error:.2e}); "
                f"omega={Tm.omega} may be too small for this model"
            )
        total += est.value

    def G_a(s, order):  # Tbar(sp)/(1-s), smooth near s = a
        sj = Jet.variable(s, order)
        return Tm.expr(sj * p) / (1.0 - sj)

    def G_1(s, order):  # -Tbar(sp)/(s-a)^n, smooth near s = 1
        sj = Jet.variable(s, order)
        return -Tm.expr(sj * p) / (sj - a) ** n

    def window(G, centre, order):
        coeffs = G(np.asarray(centre, dtype=float), order - 1).c
        part = 0j
        for m in range(order):
            j = order - m
            if j == 1:
                part += coeffs[m] * sign * 1j * math.pi
            else:
                part += coeffs[m] * (r ** (1 - j) - (-r) ** (1 - j)) / (1 - j)

        def remainder(s):
            s = np.atleast_1d(np.asarray(s, dtype=float))
            pts = centre + np.outer(_U_NODES, s - centre)
            dn = G(pts, order).derivatives()[order]
            kern = ((1 - _U_NODES) ** (order - 1) * _U_WEIGHTS)[:, None]
            return np.sum(kern * dn, axis=0) / math.factorial(order - 1)

        est = integrate_1d(remainder, centre - r, centre + r, cfg).require("pole-window remainder")
        return part + est.value

    total = total + window(G_a, a, n) + window(G_1, 1.0, 1)
    return complex(1j / (2 * math.pi) * prefactor * total)


def retarded_extension(Tm: CausalModelDistribution, p: float, mu2: float,
                       cfg: QuadratureConfig | None = None) -> complex:
    return _extension(Tm, float(p), float(mu2), +1, cfg)


def advanced_extension(Tm: CausalModelDistribution, p: float, mu2: float,
                       cfg: QuadratureConfig | None = None) -> complex:
    return _extension(Tm, float(p), float(mu2), -1, cfg)


def taylor_route_difference(Tm: CausalModelDistribution, p: float, mu2: float) -> float:
    """Tbar(p) minus its w-jet around p/mu^2, evaluated at p."""
    if not mu2 > 1:
        raise InputError("mu2 must exceed 1")
    q = p / mu2
    derivs = Tm.jet(np.asarray(q, dtype=float), Tm.omega).derivatives()
    step = p * (mu2 - 1) / mu2
    jet = sum(step ** m / math.factorial(m) * float(derivs[m]) for m in range(Tm.omega + 1))
    return float(Tm(p)) - jet


def splitting_difference_check(Tm: CausalModelDistribution, p: float, mu2: float,
                               cfg: QuadratureConfig | None = None) -> SplitResult:
    ret = retarded_extension(Tm, p, mu2, cfg)
    adv = advanced_extension(Tm, p, mu2, cfg)
    return SplitResult(ret, adv, ret - adv, complex(taylor_route_difference(Tm, p, mu2)))
