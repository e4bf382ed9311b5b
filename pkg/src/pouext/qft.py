"""Physics observables: coincident-point propagators, PV forms, loop integrals.

Conventions: the arbitrary scale in X = p^2/Lambda^2 is Lambda = m unless
given; Euclidean integrals carry d^Dp/(2pi)^D; the Minkowski integrals
follow the bare d^Dp measure, which makes

    Delta_M(D=4) = -i (2 pi)^4 Delta_E(D=4).

The radial D=4 Minkowski measure works out to -2 i pi^2 Lambda^3 X dX; see
``MINKOWSKI_D4_PREFACTOR``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from .errors import DegenerateDecompositionError, InputError
from .extend import SingularDistribution, extend_uv, extend_uv_alt, uv_log_integral
from .quadrature import QuadratureConfig, integrate_1d, integrate_nd, integrate_pv
from .testfunc import Srtf, SrtfParams, t_max

__all__ = [
    "ObservableResult",
    "delta0_euclid",
    "pv_lemma_minkowski",
    "delta0_minkowski",
    "pv_decomposition",
    "pv_coefficients",
    "pv_bracket",
    "pv_rational",
    "one_loop_I",
    "one_loop_closed_form",
    "schwinger_delta0",
    "schwinger_integrand",
    "sunset_qualitative",
    "sunset_mass_slope",
    "MINKOWSKI_D4_PREFACTOR",
]

FOUR_PI_SQ = (4 * math.pi) ** 2


def MINKOWSKI_D4_PREFACTOR(Lambda: float) -> complex:
    """-2 i pi^2 Lambda^3: -i pi (pole residue) x 4 pi (solid angle) x Lambda^3/2 (p^2 dp -> X dX)."""
    return -2j * math.pi ** 2 * Lambda ** 3


@dataclass
class ObservableResult:
    value: complex | float
    closed_form: complex | float | None = None
    rel_deviation: float | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.closed_form is not None:
            denom = abs(self.closed_form)
            diff = abs(self.value - self.closed_form)
            self.rel_deviation = diff / denom if denom > 0 else diff

    def to_dict(self) -> dict:
        def enc(v):
            if isinstance(v, complex):
                return {"re": v.real, "im": v.imag}
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            return v
        out = asdict(self)
        out["value"] = enc(self.value)
        out["closed_form"] = enc(self.closed_form)
        out["metadata"] = {k: enc(v) for k, v in self.metadata.items()}
        return out


def _limit(s: SrtfParams) -> SrtfParams:
    return s if s.alpha_limit else replace(s, alpha_limit=True)


def _g_prime(mu2: float) -> float:
    return mu2 - 1.0 - math.log(mu2)


def _meta(D, m, s: SrtfParams, **extra) -> dict[str, Any]:
    return {"D": D, "m": m, "mu2": s.mu2, "mode": "alpha_limit", "partition": s.partition.variant, **extra}


def delta0_euclid(D: int, m: float, s: SrtfParams, *, Lambda: float | None = None) -> ObservableResult:
    """Euclidean propagator at coincident points from the UV extension.

    D=4: Lambda^4/(16 pi^2) <T~,1> with T = 1/(X Lambda^2 + m^2), d=2, k=1.
    D=2: Lambda^2/(4 pi) <T~,1> from the alternative form, d=1, k=0.
    The alpha -> 1 limit is always used (the finite-alpha pairing vanishes
    identically because G and G' vanish at X_max).
    """
    if m <= 0:
        raise InputError("mass must be positive")
    Lam = m if Lambda is None else float(Lambda)
    s = _limit(s)

    def prop(X):
        return 1.0 / (np.asarray(X, dtype=float) * Lam ** 2 + m ** 2)

    if D == 4:
        T = SingularDistribution(prop, 2, uv_power=0.0, name="euclid_prop_d4")
        pairing = extend_uv(T, 1, s).pair()
        value = Lam ** 4 / FOUR_PI_SQ * pairing
        closed = m ** 2 / FOUR_PI_SQ * _g_prime(s.mu2)
    elif D == 2:
        T = SingularDistribution(prop, 1, uv_power=0.0, name="euclid_prop_d2")
        pairing = extend_uv_alt(T, 0, 1, s.mu2).pair()
        value = Lam ** 2 / (4 * math.pi) * pairing
        closed = math.log(s.mu2) / (4 * math.pi)
    else:
        raise InputError(f"D must be 2 or 4, got {D}")
    return ObservableResult(value, closed, metadata=_meta(D, m, s, Lambda=Lam, pairing=pairing))


def pv_lemma_minkowski(p: float, m: float, s: SrtfParams, sign: int = 1, *,
                       Lambda: float | None = None, return_parts: bool = False,
                       alpha_limit: bool = True):
    """Integral over p0 of f^2 / (p0 +- omega_p -+ i eps), split as PV + pole.

    The test function is f(p0^2, p^2) = F((p0^2 + p^2)/Lambda^2) with F an
    SRTF.  The PV part is evaluated in its extended form: f^2 is replaced by
    -p0 d/dp0 of the log t-integral up to t_max, which leaves
    2(1-alpha) p0^2/(p0^2+p^2) on |p0| < L (L the support edge in p0) and
    exactly 0 in the alpha -> 1 limit.  The pole part is +-i pi f^2(omega^2, p^2).
    The limit is taken unless ``alpha_limit=False``, which keeps the finite-alpha
    extended value of the PV part.
    """
    if sign not in (1, -1):
        raise InputError("sign must be +1 or -1")
    if m <= 0:
        raise InputError("mass must be positive")
    Lam = m if Lambda is None else float(Lambda)
    if alpha_limit:
        s = _limit(s)
    omega = math.sqrt(p * p + m * m)
    F = Srtf(s)
    pole_val = float(F((omega ** 2 + p ** 2) / Lam ** 2)) ** 2
    pole = sign * 1j * math.pi * pole_val
    if s.alpha_limit:
        pv = 0.0
    else:
        L2 = Lam ** 2 * s.x_max - p * p
        if not math.isfinite(L2):
            pv = 0.0
        elif L2 <= omega ** 2:
            pv = 0.0 if L2 <= 0 else _pv_outside(p, omega, math.sqrt(L2), s.alpha, sign)
        else:
            L = math.sqrt(L2)
            est = integrate_pv(lambda q: 2 * (1 - s.alpha) * q * q / (q * q + p * p), -sign * omega, -L, L)
            est.require("PV part")
            pv = float(est.value)
    total = pv + pole
    return (pv, pole) if return_parts else total


def _pv_outside(p, omega, L, alpha, sign):
    est = integrate_1d(lambda q: 2 * (1 - alpha) * q * q / ((q * q + p * p) * (q + sign * omega)), -L, L)
    return float(est.require("PV part").value)


def delta0_minkowski(D: int, m: float, s: SrtfParams, *, Lambda: float | None = None) -> ObservableResult:
    """Minkowski coincident-point propagator via the PV lemma and UV extension.

    D=2: -i pi <(1/omega_p)~, 1> over the real p-line, with
    (1/omega_p)~ = 1/sqrt(p^2+m^2) - 1/sqrt(p^2+m^2 mu^4).  The closed form
    is -2 i pi log(mu2); the Wick-rotated PV-difference form is reported in
    the metadata.
    D=4: -2 i pi^2 Lambda^3 <T~, 1> with T = 1/sqrt(X(X Lambda^2+m^2)),
    d=2, k=1; the closed form is -i (2 pi)^4 times the Euclidean value.
    """
    if m <= 0:
        raise InputError("mass must be positive")
    Lam = m if Lambda is None else float(Lambda)
    s = _limit(s)
    mu2 = s.mu2
    if D == 2:
        T = SingularDistribution(lambda P: 1.0 / np.sqrt(np.asarray(P, dtype=float) ** 2 + m * m), 1,
                                 uv_power=0.0, name="inv_omega")
        ext = extend_uv_alt(T, 0, 1, mu2)
        half_line = ext.pair()
        value = -1j * math.pi * 2.0 * half_line
        closed = -2j * math.pi * math.log(mu2)
        pvd = integrate_1d(lambda q: 1.0 / (q + m * m) - 1.0 / (q + m * m * mu2 * mu2), 0.0, math.inf,
                           QuadratureConfig(rel_tol=1e-11, abs_tol=1e-14))
        pvd.require("PV-difference form")
        meta = _meta(2, m, s, pv_difference_form=-1j * math.pi * float(pvd.value), pairing=half_line)
    elif D == 4:
        def tm(X):
            X = np.asarray(X, dtype=float)
            return 1.0 / np.sqrt(X * (X * Lam ** 2 + m * m))

        T = SingularDistribution(tm, 2, uv_power=0.0, name="inv_sqrt_x_omega")
        ext = extend_uv_alt(T, 1, 2, mu2)
        pairing = ext.pair()
        pref = MINKOWSKI_D4_PREFACTOR(Lam)
        value = pref * pairing
        euclid = m ** 2 / FOUR_PI_SQ * _g_prime(mu2)
        closed = -1j * (2 * math.pi) ** 4 * euclid
        meta = _meta(4, m, s, Lambda=Lam, pairing=pairing, prefactor=pref,
                     euclid_closed_form=euclid, ratio_to_euclid=value / euclid if euclid else None)
    else:
        raise InputError(f"D must be 2 or 4, got {D}")
    return ObservableResult(value, closed, metadata=meta)


# -- Pauli-Villars decomposition ------------------------------------------------

def _distinct(values: Sequence[float], rtol: float = 1e-12) -> bool:
    vals = sorted(values)
    return all(abs(b - a) > rtol * max(abs(a), abs(b), 1.0) for a, b in zip(vals, vals[1:]))


def pv_coefficients(m: float, L1: float, L2: float) -> dict:
    """Coefficients of the two-regulator bracket with 1/X^3 fall-off.

    B = C = 0 and delta = eps = 0; alpha is fixed by A/((m^2-L1^2)(m^2-L2^2)) = 1.
    For L1 = L2 = m the normalisation is singular and the confluent choice
    alpha = 2, gamma = 1 (A = m^4) is returned instead.
    """
    m2, a2, b2 = m * m, L1 * L1, L2 * L2
    if math.isclose(a2, m2) and math.isclose(b2, m2):
        alpha = 2.0
        confluent = True
    elif _distinct([m2, a2, b2]):
        alpha = 1.0 + (m2 - a2) * (m2 - b2) / b2 ** 2
        confluent = False
    else:
        raise DegenerateDecompositionError("regulator masses must be distinct from m and from each other")
    return {
        "alpha": alpha, "beta": a2 + (1 - alpha) * b2, "gamma": alpha - 1.0, "delta": 0.0, "epsilon": 0.0,
        "A": (alpha - 1.0) * b2 ** 2, "B": 0.0, "C": 0.0, "confluent": confluent,
    }


def pv_bracket(X, m: float, L1: float, L2: float, c: dict | None = None):
    """(1/(X+m^2)) [1 - (aX+b)/(X+L1^2) + (gX^2+dX+e)/((X+L1^2)(X+L2^2))]."""
    c = c or pv_coefficients(m, L1, L2)
    X = np.asarray(X, dtype=float)
    a2, b2 = L1 * L1, L2 * L2
    inner = (1 - (c["alpha"] * X + c["beta"]) / (X + a2)
             + (c["gamma"] * X * X + c["delta"] * X + c["epsilon"]) / ((X + a2) * (X + b2)))
    return inner / (X + m * m)


def pv_rational(X, m: float, L1: float, L2: float, c: dict | None = None):
    """(A + B X + C X^2) / ((X+m^2)(X+L1^2)(X+L2^2))."""
    c = c or pv_coefficients(m, L1, L2)
    X = np.asarray(X, dtype=float)
    return (c["A"] + c["B"] * X + c["C"] * X * X) / ((X + m * m) * (X + L1 * L1) * (X + L2 * L2))


def pv_decomposition(m: float, Lambdas: Sequence[float], p2: float) -> tuple[float, float]:
    """Product form and partial-fraction sum of the n-regulator propagator.

    Returns (1/(p2+m^2) prod (L_i^2-m^2)/(p2+L_i^2),
             1/(p2+m^2) - sum_j prod_{i!=j}(L_i^2-m^2)/prod_{i!=j}(L_i^2-L_j^2) / (p2+L_j^2)).
    The confluent case L_1 = L_2 = m returns the bracket form against m^4/(p2+m^2)^3.
    """
    lams = [float(x) for x in Lambdas]
    if not lams:
        raise InputError("need at least one regulator mass")
    m2 = m * m
    sq = [x * x for x in lams]
    if len(lams) == 2 and all(math.isclose(v, m2) for v in sq):
        return float(pv_bracket(p2, m, m, m)), m2 * m2 / (p2 + m2) ** 3
    if not _distinct([m2, *sq]):
        raise DegenerateDecompositionError("regulator masses must be distinct from m and from each other")
    lhs = 1.0 / (p2 + m2)
    for v in sq:
        lhs *= (v - m2) / (p2 + v)
    rhs = 1.0 / (p2 + m2)
    for j, vj in enumerate(sq):
        num = math.prod(v - m2 for i, v in enumerate(sq) if i != j)
        den = math.prod(v - vj for i, v in enumerate(sq) if i != j)
        rhs -= num / den / (p2 + vj)
    return lhs, rhs


# -- one loop -----------------------------------------------------------------

def one_loop_closed_form(k2: float, m: float, mu2: float) -> float:
    """(1/(4pi)^2) [log mu2 - integral_0^1 log(c x(1-x) + 1) dx], c = k2/m^2."""
    c = k2 / (m * m)
    if c < 0:
        raise InputError("k2 must be non-negative")
    if c == 0:
        xint = 0.0
    else:
        beta = math.sqrt(1.0 + 4.0 / c)
        xint = -2.0 + beta * math.log((beta + 1.0) / (beta - 1.0))
    return (math.log(mu2) - xint) / FOUR_PI_SQ


def one_loop_I(k2: float, m: float, s: SrtfParams, *, Lambda: float | None = None,
               cfg: QuadratureConfig | None = None) -> ObservableResult:
    """One-loop four-point integral I(k^2) at D=4.

    Numeric route: the Y-integral is the k=0, d=1 UV extension of
    T(Y) = Y/(Y Lambda^2/m^2 + 1)^2, normalised by its t-integral, times the
    (x, t) integral with the t-range [1, mu2/(k2 x(1-x)/m^2 + 1)] (signed when
    that bound drops below 1).
    """
    if k2 < 0:
        raise InputError("k2 must be non-negative")
    if m <= 0:
        raise InputError("mass must be positive")
    Lam = m if Lambda is None else float(Lambda)
    s = _limit(s)
    r = Lam ** 2 / m ** 2
    T = SingularDistribution(lambda Y: np.asarray(Y) / (np.asarray(Y) * r + 1.0) ** 2, 1, uv_power=0.0,
                             name="loop_y")
    g = uv_log_integral(s.mu2, 0)
    # J = 2 (Lambda/m)^4 integral Y dY/(Y r + 1)^3, equal to 1
    J = extend_uv(T, 0, s).pair() / g * r ** 2 if g else 2.0 * r ** 2 * _loop_y_moment(r)

    c = k2 / (m * m)

    def bound(x):
        return s.mu2 / (c * x * (1 - x) + 1.0)

    def f(x, t):
        return np.sign(bound(x) - 1.0) / t

    xt = integrate_nd(f, [(0.0, 1.0), (lambda x: min(1.0, bound(x)), lambda x: max(1.0, bound(x)))],
                      cfg or QuadratureConfig(rel_tol=1e-9, abs_tol=1e-13))
    xt.require("one-loop (x, t) integral")
    value = J / FOUR_PI_SQ * float(xt.value)
    closed = one_loop_closed_form(k2, m, s.mu2)
    return ObservableResult(value, closed, metadata=_meta(4, m, s, k2=k2, J=J, xt_integral=float(xt.value)))


def _loop_y_moment(r: float) -> float:
    est = integrate_1d(lambda Y: Y / (Y * r + 1.0) ** 3, 0.0, math.inf)
    return float(est.require("Y moment").value)


# -- Schwinger representation -------------------------------------------------

def schwinger_integrand(y, u, t, mu2: float):
    """Integrand in (y, u, t) after the Lagrange insertion and two partial integrations in u.

    y e^-y e^-u (t-1)/t on t in [1, mu2]; u^-2 of the bare representation is
    cancelled by the u^2 of the insertion, so nothing diverges at u -> 0.
    """
    y, u, t = (np.asarray(v, dtype=float) for v in (y, u, t))
    inside = (t >= 1.0) & (t <= mu2)
    return np.where(inside, y * np.exp(-y) * np.exp(-u) * (t - 1.0) / t, 0.0)


def schwinger_delta0(m: float, s: SrtfParams, cfg: QuadratureConfig | None = None) -> ObservableResult:
    """Delta(0) at D=4 from the Schwinger (y, u) representation (Lambda = m)."""
    if m <= 0:
        raise InputError("mass must be positive")
    s = _limit(s)
    mu2 = s.mu2
    if mu2 == 1.0:
        return ObservableResult(0.0, 0.0, metadata=_meta(4, m, s))
    est = integrate_nd(lambda y, u, t: schwinger_integrand(y, u, t, mu2),
                       [(0.0, math.inf), (0.0, math.inf), (1.0, mu2)],
                       cfg or QuadratureConfig(rel_tol=1e-8, abs_tol=1e-13))
    est.require("Schwinger integral")
    value = m * m / FOUR_PI_SQ * float(est.value)
    closed = m * m / FOUR_PI_SQ * _g_prime(mu2)
    return ObservableResult(value, closed, metadata=_meta(4, m, s, level_failures=est.level_failures))


# -- two-loop sunset ------------------------------------------------------------

def sunset_qualitative(m: float, s: SrtfParams, cutoff: float | None = None, *,
                       Lambda: float | None = None, upper: float | None = None,
                       rel_tol: float = 1e-3) -> ObservableResult:
    """Two-loop sunset at zero external momentum with Schwinger cut-offs.

    (1/(16 pi^2)^2) integral over alpha_i in [c, upper] of
    exp(-m^2 sum alpha) / (a1 a2 + a2 a3 + a1 a3)^2, c = 1/(mu2 Lambda^2) by
    default.  Log variables alpha = c e^w and a refined tensor Gauss rule.
    """
    if m <= 0:
        raise InputError("mass must be positive")
    Lam = m if Lambda is None else float(Lambda)
    c = 1.0 / (s.mu2 * Lam ** 2) if cutoff is None else float(cutoff)
    if c <= 0:
        raise InputError("cutoff must be positive")
    top = 40.0 / m ** 2 if upper is None else float(upper)
    meta = _meta(4, m, s, cutoff=c, upper=top)
    meta["mode"] = "schwinger"
    if c >= top:
        return ObservableResult(0.0, None, metadata=meta)
    value, evaluations, converged = _sunset_integral(m, c, top, rel_tol, slope=False)
    meta.update(evaluations=evaluations, converged=converged)
    return ObservableResult(value, None, metadata=meta)


def sunset_mass_slope(m: float, s: SrtfParams, cutoff: float | None = None, *,
                      Lambda: float | None = None, upper: float | None = None,
                      rel_tol: float = 1e-3) -> ObservableResult:
    """-d/dm^2 of the sunset at fixed cut-offs.

    The quadratic divergence of the sunset does not depend on m, so the slope
    isolates the logarithmic growth (overall log times the one-loop subdivergence
    logs).  Same integration scheme as ``sunset_qualitative`` with an extra
    factor a1 + a2 + a3.
    """
    if m <= 0:
        raise InputError("mass must be positive")
    Lam = m if Lambda is None else float(Lambda)
    c = 1.0 / (s.mu2 * Lam ** 2) if cutoff is None else float(cutoff)
    if c <= 0:
        raise InputError("cutoff must be positive")
    top = 40.0 / m ** 2 if upper is None else float(upper)
    meta = _meta(4, m, s, cutoff=c, upper=top)
    meta["mode"] = "schwinger_mass_slope"
    if c >= top:
        return ObservableResult(0.0, None, metadata=meta)
    value, evaluations, converged = _sunset_integral(m, c, top, rel_tol, slope=True)
    meta.update(evaluations=evaluations, converged=converged)
    return ObservableResult(value, None, metadata=meta)


def _sunset_integral(m, c, top, rel_tol, *, slope):
    W = math.log(top / c)

    def integrand(w1, w2, w3):
        a1, a2, a3 = c * np.exp(w1), c * np.exp(w2), c * np.exp(w3)
        q = a1 * a2 + a2 * a3 + a1 * a3
        out = a1 * a2 * a3 * np.exp(-m * m * (a1 + a2 + a3)) / (q * q)
        return out * (a1 + a2 + a3) if slope else out

    # split each axis at its mid-point in w so nodes concentrate where the
    # integrand changes scale
    total, evaluations, converged = 0.0, 0, True
    cuts = [0.0, 0.5 * W, W] if W > 2 else [0.0, W]
    for i in range(len(cuts) - 1):
        for j in range(len(cuts) - 1):
            for k in range(len(cuts) - 1):
                box = [(cuts[i], cuts[i + 1]), (cuts[j], cuts[j + 1]), (cuts[k], cuts[k + 1])]
                est = integrate_nd(integrand, box, QuadratureConfig(rel_tol=rel_tol * 0.1, abs_tol=1e-300),
                                   method="tensor")
                total += est.value
                evaluations += est.evaluations
                converged &= est.converged
    return total / FOUR_PI_SQ ** 2, evaluations, converged
