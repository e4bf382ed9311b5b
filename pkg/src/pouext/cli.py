"""Command-line front end.

    pouext propagator --D 4 --m 1 --mu2 2
    pouext scan-mu --obs delta0 --D 2 --mu2 1.1:4:0.1 --output scan.csv --plot
    pouext verify all

Parameters resolve as flags > ``--config`` file (key=value lines) >
``CAUSAL_<KEY>`` environment variables > defaults.  Exit codes: 0 ok,
2 bad configuration, 3 numerical failure, 4 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import metadata

import numpy as np

from . import extend, lagrange, qft, split, testfunc
from .errors import ConvergenceError, IndeterminateOrderError, InputError, PouError
from .quadrature import QuadratureConfig

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4
SUBCOMMANDS = ("testfn", "extend", "propagator", "loop4", "sunset", "scan-mu", "dispersion-check", "verify")
SUITES = ("partition", "lagrange", "extend", "qft", "split", "all")

DEFAULTS = {
    "m": 1.0, "mu2": "2.0", "alpha": 0.5, "D": 4, "k2": "1.0", "model": "lorentzian", "omega": None,
    "degree": 0, "p": "0.5:2:0.5", "X": "0.05:3:0.05", "cutoff": "1e-2,1e-3,1e-4", "variant": "nu_integral",
    "alpha_limit": False, "metric": "euclid", "obs": "delta0", "distribution": "inv_x", "k": None,
    "regime": "uv", "order": 0, "rel_tol": None, "max_subdiv": None, "format": "csv", "output": "-",
    "plot": False, "no_timestamp": False, "workers": 4, "Lambda": None,
}
_INT_KEYS = {"D", "degree", "order", "max_subdiv", "workers"}
_FLOAT_KEYS = {"m", "alpha", "rel_tol", "Lambda"}
_BOOL_KEYS = {"alpha_limit", "plot", "no_timestamp"}
_OPT_INT_KEYS = {"omega", "k"}


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


# -- configuration ------------------------------------------------------------------

@dataclass
class RunConfig:
    subcommand: str
    params: dict
    output: str = "-"
    format: str = "csv"
    plot: bool = False
    suite: str | None = None

    def digest(self) -> str:
        blob = json.dumps({"subcommand": self.subcommand, "suite": self.suite, "params": self.params},
                          sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()


def _coerce(key: str, raw):
    if raw is None:
        return None
    try:
        if key in _BOOL_KEYS:
            if isinstance(raw, bool):
                return raw
            text = str(raw).strip().lower()
            if text in ("1", "true", "yes", "on"):
                return True
            if text in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if key in _INT_KEYS or key in _OPT_INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError:
        raise InputError(f"invalid value for {key}: {raw!r}") from None
    return str(raw) if not isinstance(raw, (int, float)) else raw


def read_config_file(path: str) -> dict:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise InputError(f"cannot read config file {path}: {exc}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise InputError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def _env_params(environ) -> dict:
    out = {}
    for key in DEFAULTS:
        name = "CAUSAL_" + key.upper()
        if name in environ:
            out[key] = environ[name]
    return out


def resolve_params(flags: dict, config_path: str | None = None, environ=None) -> dict:
    environ = os.environ if environ is None else environ
    layers = [DEFAULTS, _env_params(environ)]
    if config_path:
        layers.append(read_config_file(config_path))
    layers.append({k: v for k, v in flags.items() if v is not None and k in DEFAULTS})
    merged = {}
    for layer in layers:
        merged.update(layer)
    return {k: _coerce(k, v) for k, v in merged.items()}


def parse_grid(spec) -> list[float]:
    """'a:b:step' (inclusive), 'x1,x2,...' or a single number."""
    text = str(spec).strip()
    if not text:
        raise InputError("empty scan")
    try:
        if ":" in text:
            parts = [float(x) for x in text.split(":")]
            if len(parts) != 3:
                raise InputError(f"grid {text!r} must look like start:stop:step")
            a, b, step = parts
            if step <= 0:
                raise InputError(f"grid step must be positive in {text!r}")
            if b < a:
                raise InputError("empty scan")
            n = int(math.floor((b - a) / step + 1e-9)) + 1
            return [float(np.round(a + i * step, 12)) for i in range(n)]
        values = [float(x) for x in text.split(",") if x.strip()]
    except InputError:
        raise
    except ValueError:
        raise InputError(f"cannot parse grid {text!r}") from None
    if not values:
        raise InputError("empty scan")
    return values


def _quad_cfg(params: dict, base: QuadratureConfig) -> QuadratureConfig:
    changes = {}
    if params.get("rel_tol") is not None:
        if not params["rel_tol"] > 0:
            raise InputError("rel_tol must be positive")
        changes["rel_tol"] = params["rel_tol"]
    if params.get("max_subdiv") is not None:
        if params["max_subdiv"] < 1:
            raise InputError("max_subdiv must be at least 1")
        changes["max_subdivisions"] = params["max_subdiv"]
    return base.replace(**changes) if changes else base


def _srtf(params: dict, mu2: float) -> testfunc.SrtfParams:
    variant = params["variant"]
    if variant not in (testfunc.NU_INTEGRAL, testfunc.CONVOLUTION):
        raise InputError(f"unknown partition variant {variant!r}")
    partition = testfunc.PartitionParams(h=min(mu2 - 1.0, 0.5), variant=variant)
    return testfunc.SrtfParams(mu2=mu2, alpha=params["alpha"], partition=partition,
                               alpha_limit=params["alpha_limit"])


def _single(params: dict, key: str) -> float:
    grid = parse_grid(params[key])
    if len(grid) != 1:
        raise InputError(f"{key} takes a single value for this subcommand")
    return grid[0]


# -- reports -------------------------------------------------------------------------

@dataclass
class ScanReport:
    axis: str
    grid: list
    columns: list
    rows: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def sort(self):
        idx = self.columns.index(self.axis) if self.axis in self.columns else None
        if idx is not None:
            self.rows.sort(key=lambda r: r[idx])

    def to_dict(self) -> dict:
        return {"axis": {"name": self.axis, "grid": self.grid}, "columns": self.columns,
                "rows": [dict(zip(self.columns, r)) for r in self.rows],
                "notes": self.notes, "provenance": self.provenance}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def render_csv(report: ScanReport, cfg: RunConfig, timestamp: bool) -> str:
    buf = io.StringIO()
    buf.write(f"# pouext {report.provenance.get('version')} {cfg.subcommand}\n")
    if timestamp:
        buf.write(f"# generated {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}\n")
    buf.write(f"# config_sha256 {report.provenance.get('config_sha256')}\n")
    for note in report.notes:
        buf.write(f"# {note}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(report.columns)
    for row in report.rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def render_json(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, default=_json_default) + "\n"


def _json_default(v):
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return str(v)


def plot_script(report: ScanReport, cfg: RunConfig, data_path: str) -> str:
    x = report.axis
    ys = [c for c in report.columns if c not in (x,) and not c.endswith("_im")][:3]
    lines = [f"# plot script for {cfg.subcommand}; columns are 1-based",
             f"data = {data_path}", f"x = {report.columns.index(x) + 1} label={x}"]
    for y in ys:
        lines.append(f"y = {report.columns.index(y) + 1} label={y}")
    return "\n".join(lines) + "\n"


def _scan(fn, grid, workers: int):
    if workers <= 1 or len(grid) == 1:
        return [fn(v) for v in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, grid))  # map keeps input order


def _re(z):
    return float(np.real(z))


def _im(z):
    return float(np.imag(z))


# -- subcommands ---------------------------------------------------------------------

def cmd_testfn(params: dict, cfg: RunConfig) -> ScanReport:
    mu2 = _single(params, "mu2")
    s = _srtf(params, mu2)
    order = params["order"]
    if not 0 <= order <= 4:
        raise InputError("order must lie in 0..4")
    grid = parse_grid(params["X"])
    if min(grid) < 0:
        raise InputError("X must be non-negative")
    f = testfunc.Srtf(s)
    cols = ["X", "f"] + [f"d{n}f" for n in range(1, order + 1)]
    rows = []
    for X in grid:
        rows.append([X, float(f(X))] + [float(f.derivative(X, n)) for n in range(1, order + 1)])
    notes = ["X dimensionless (p^2/Lambda^2); f is the super-regular test function",
             f"mu2={mu2} alpha={s.alpha} variant={s.partition.variant} alpha_limit={s.alpha_limit}"]
    return ScanReport("X", grid, cols, rows, notes)


def cmd_extend(params: dict, cfg: RunConfig) -> ScanReport:
    T = extend.builtin_distribution(params["distribution"])
    regime = params["regime"]
    mu2 = _single(params, "mu2")
    k = params["k"]
    if k is None:
        k = extend.scaling_order(T, "ir" if regime == "ir" else "uv")
    if regime == "ir":
        ext = extend.extend_ir(T, k, 1.0 / mu2)
    elif regime == "uv":
        ext = extend.extend_uv(T, k, _srtf(params, mu2))
    elif regime == "uv_alt":
        ext = extend.extend_uv_alt(T, k, T.d, mu2)
    else:
        raise InputError(f"regime must be ir, uv or uv_alt, got {regime!r}")
    grid = parse_grid(params["X"])
    if min(grid) <= 0:
        raise InputError("X must be positive")
    rows = _scan(lambda X: [X, float(T.evaluate(X)), float(ext.evaluate(X))], grid, params["workers"])
    notes = [f"distribution={T.name} d={T.d} regime={regime} k={k} mu2={mu2}",
             "T = original singular distribution; T_ext = its extension (equal to T for X > 0 "
             "in the ir regime, subtracted in the uv regimes)"]
    return ScanReport("X", grid, ["X", "T", "T_ext"], rows, notes)


_PROP_NOTES = {
    ("euclid", 4): "closed_form = m^2/(4 pi)^2 (mu2 - 1 - log mu2)",
    ("euclid", 2): "closed_form = log(mu2)/(4 pi)",
    ("minkowski", 4): "closed_form = -i (2 pi)^4 m^2/(4 pi)^2 (mu2 - 1 - log mu2)",
    ("minkowski", 2): "closed_form = -2 i pi log(mu2)",
}


def _propagator_row(params, mu2):
    D, m = params["D"], params["m"]
    s = _srtf(params, mu2)
    if params["metric"] == "euclid":
        res = qft.delta0_euclid(D, m, s, Lambda=params["Lambda"])
    elif params["metric"] == "minkowski":
        res = qft.delta0_minkowski(D, m, s, Lambda=params["Lambda"])
    else:
        raise InputError(f"metric must be euclid or minkowski, got {params['metric']!r}")
    return [mu2, math.log(mu2), _re(res.value), _im(res.value),
            _re(res.closed_form), _im(res.closed_form), res.rel_deviation]


_OBS_COLUMNS = ["mu2", "log_mu2", "numeric_re", "numeric_im", "closed_form_re", "closed_form_im", "rel_deviation"]


def _check_D(params):
    if params["D"] not in (2, 4):
        raise InputError(f"D must be 2 or 4, got {params['D']}")
    if not params["m"] > 0:
        raise InputError("m must be positive")


def cmd_propagator(params: dict, cfg: RunConfig) -> ScanReport:
    _check_D(params)
    grid = parse_grid(params["mu2"])
    rows = _scan(lambda mu2: _propagator_row(params, mu2), grid, params["workers"])
    notes = ["propagator at coincident points, units of m^(D-2)",
             _PROP_NOTES[(params["metric"], params["D"])]]
    return ScanReport("mu2", grid, list(_OBS_COLUMNS), rows, notes)


def cmd_loop4(params: dict, cfg: RunConfig) -> ScanReport:
    m = params["m"]
    if not m > 0:
        raise InputError("m must be positive")
    mu2 = _single(params, "mu2")
    s = _srtf(params, mu2)
    qcfg = _quad_cfg(params, QuadratureConfig(rel_tol=1e-9, abs_tol=1e-13))
    grid = parse_grid(params["k2"])

    def row(k2):
        res = qft.one_loop_I(k2, m, s, Lambda=params["Lambda"], cfg=qcfg)
        return [k2, _re(res.value), _re(res.closed_form), res.rel_deviation]

    rows = _scan(row, grid, params["workers"])
    notes = [f"one-loop four-point integral, k2 in units of m^2; mu2={mu2}",
             "closed_form = [log mu2 + 2 - b log((b+1)/(b-1))]/(4 pi)^2, b = sqrt(1 + 4 m^2/k2)"]
    return ScanReport("k2", grid, ["k2", "numeric", "closed_form", "rel_deviation"], rows, notes)


def cmd_sunset(params: dict, cfg: RunConfig) -> ScanReport:
    m = params["m"]
    mu2 = _single(params, "mu2")
    s = _srtf(params, mu2)
    grid = parse_grid(params["cutoff"])

    def row(c):
        res = qft.sunset_qualitative(m, s, c, Lambda=params["Lambda"])
        if not res.metadata.get("converged", True):
            raise ConvergenceError(f"sunset integral did not converge at cutoff {c}")
        slope = qft.sunset_mass_slope(m, s, c, Lambda=params["Lambda"])
        return [c, _re(res.value), _re(slope.value), -math.log(c)]

    rows = _scan(row, grid, params["workers"])
    notes = ["two-loop sunset at zero momentum with Schwinger cutoff; no closed form exists",
             "value should be finite and grow as the cutoff shrinks",
             "mass_slope = -d/dm^2 at fixed cutoff; free of the quadratic divergence, grows like log^2"]
    report = ScanReport("cutoff", grid, ["cutoff", "numeric", "mass_slope", "log_inv_cutoff"], rows, notes)
    return report


def cmd_scan_mu(params: dict, cfg: RunConfig) -> ScanReport:
    obs = params["obs"]
    grid = parse_grid(params["mu2"])
    if min(grid) <= 1:
        raise InputError("mu2 values must exceed 1")
    if obs in ("delta0", "delta0_minkowski"):
        _check_D(params)
        local = dict(params, metric="minkowski" if obs == "delta0_minkowski" else params["metric"])
        rows = _scan(lambda mu2: _propagator_row(local, mu2), grid, params["workers"])
        notes = ["propagator at coincident points versus mu2", _PROP_NOTES[(local["metric"], params["D"])]]
        return ScanReport("mu2", grid, list(_OBS_COLUMNS), rows, notes)
    if obs == "loop4":
        k2 = _single(params, "k2")

        def row(mu2):
            res = qft.one_loop_I(k2, params["m"], _srtf(params, mu2), Lambda=params["Lambda"])
            return [mu2, math.log(mu2), _re(res.value), 0.0, _re(res.closed_form), 0.0, res.rel_deviation]

        rows = _scan(row, grid, params["workers"])
        return ScanReport("mu2", grid, list(_OBS_COLUMNS), rows, [f"one-loop I at k2={k2} versus mu2"])
    if obs == "sunset":
        def row(mu2):
            res = qft.sunset_qualitative(params["m"], _srtf(params, mu2), Lambda=params["Lambda"])
            return [mu2, math.log(mu2), _re(res.value), 0.0, None, None, None]

        rows = _scan(row, grid, params["workers"])
        return ScanReport("mu2", grid, list(_OBS_COLUMNS), rows, ["two-loop sunset versus mu2; no closed form"])
    raise InputError(f"unknown observable {obs!r}; choose delta0, delta0_minkowski, loop4 or sunset")


def cmd_dispersion(params: dict, cfg: RunConfig) -> ScanReport:
    model = split.model_distribution(params["model"], params["omega"], degree=params["degree"])
    mu2 = _single(params, "mu2")
    qcfg = _quad_cfg(params, split.DEFAULT_CFG)
    grid = parse_grid(params["p"])

    def row(p):
        r = split.splitting_difference_check(model, p, mu2, qcfg)
        return [p, _re(r.retarded), _im(r.retarded), _re(r.advanced), _im(r.advanced),
                _re(r.difference), _re(r.bphz_remainder), r.gap]

    rows = _scan(row, grid, params["workers"])
    cols = ["p", "retarded_re", "retarded_im", "advanced_re", "advanced_im",
            "difference_dispersion", "difference_taylor", "abs_gap"]
    notes = [f"model={model.name} omega={model.omega} mu2={mu2}; p dimensionless",
             "difference_taylor = Tbar(p) - sum_{n<=omega} [p(mu2-1)/mu2]^n/n! Tbar^(n)(p/mu2)"]
    return ScanReport("p", grid, cols, rows, notes)


_HANDLERS = {
    "testfn": cmd_testfn, "extend": cmd_extend, "propagator": cmd_propagator, "loop4": cmd_loop4,
    "sunset": cmd_sunset, "scan-mu": cmd_scan_mu, "dispersion-check": cmd_dispersion,
}


# -- verify --------------------------------------------------------------------------

def _record(suite, name, deviation, threshold):
    deviation = float(deviation)
    return {"suite": suite, "name": name, "deviation": deviation, "threshold": threshold,
            "passed": bool(math.isfinite(deviation) and deviation <= threshold)}


def _suite_partition(tol):
    out = []
    x = np.linspace(0.0, 1.0, 1000)
    grid = np.linspace(-2.0, 6.0, 1000)
    for variant in (testfunc.NU_INTEGRAL, testfunc.CONVOLUTION):
        p = testfunc.PartitionParams(h=1.0, variant=variant)
        out.append(_record("partition", f"complement_identity[{variant}]",
                           np.max(np.abs(testfunc.complement_sum(x, p) - 1.0)), tol(1e-12)))
        js = range(-4, 9)
        cells = [testfunc.elementary_u(grid, p.with_j(j)) for j in js]
        supports = [p.with_j(j).support for j in js]
        total = np.sum(cells, axis=0)
        out.append(_record("partition", f"partition_sum[{variant}]", np.max(np.abs(total - 1.0)), tol(1e-12)))
        for n in (2, 3, 4):
            # (sum beta)^n expanded as a sum over ordered n-tuples of cells
            acc = np.ones_like(grid)
            for _ in range(n):
                acc = sum(acc * c for c in cells)
            dev = np.max(np.abs(acc - 1.0))
            # c**n underflows once c < tiny**(1/n); those points are not held against it
            floor = np.finfo(float).tiny ** (1.0 / n)
            same_support = True
            for c, (lo, hi) in zip(cells, supports):
                inside = (grid > lo) & (grid < hi)
                same_support &= bool(np.all(c[~inside] ** n == 0))
                same_support &= bool(np.all(c[inside & (c >= floor)] ** n > 0))
            out.append(_record("partition", f"power_stability[{variant},n={n}]",
                               dev if same_support else math.inf, tol(1e-12)))
    return out


def _suite_lagrange(tol):
    out = []
    f = testfunc.Srtf(testfunc.SrtfParams(mu2=2.0, alpha=0.5))
    pts = [0.3, 0.8, 1.5, 2.5]
    for k in range(4):
        dev_ir = max(abs(lagrange.lagrange_remainder_ir(f, X, k) - f(X)) for X in pts)
        dev_uv = max(abs(lagrange.lagrange_uv(f, X, k) - f(X)) for X in pts)
        out.append(_record("lagrange", f"ir_fixed_point[k={k}]", dev_ir, tol(1e-7)))
        out.append(_record("lagrange", f"uv_fixed_point[k={k}]", dev_uv, tol(1e-7)))
    d1, d2 = lagrange.lagrange_alt_check(f, 1.5, 1, 3)
    out.append(_record("lagrange", "alt_forms[d=3,k=1]", max(abs(d1 - f(1.5)), abs(d2 - f(1.5))), tol(1e-7)))
    return out


def _suite_extend(tol):
    out = []
    T2 = extend.builtin_distribution("euclid_prop_d4")
    T1 = extend.builtin_distribution("inv_omega")
    out.append(_record("extend", "scaling_order[1/(X+1),d=2]", abs(extend.scaling_order(T2, "uv") - 1), tol(0.0)))
    out.append(_record("extend", "scaling_order[1/omega,d=1]", abs(extend.scaling_order(T1, "uv") - 0), tol(0.0)))
    mu2 = 2.0
    val = extend.extend_uv(T2, 1, testfunc.SrtfParams(mu2=mu2, alpha_limit=True)).pair()
    closed = mu2 - 1 - math.log(mu2)
    out.append(_record("extend", "uv_pairing[1/(X+1),d=2]", abs(val - closed) / closed, tol(1e-6)))
    def gauss(x):
        return np.exp(-0.5 * np.asarray(x) ** 2)

    for k, q in ((1, 0.0), (1, 0.4)):
        res = extend.bphz_correspondence(gauss, None, k, q=q, p=0.9)
        out.append(_record("extend", f"bphz_pointwise[k={k},q={q}]", abs(res[0] - res[1]), tol(1e-5)))
    f = testfunc.Srtf(testfunc.SrtfParams(mu2=4.0))
    lhs, rhs = extend.bphz_correspondence(extend.builtin_distribution("inv_x"), f, 0)
    out.append(_record("extend", "bphz_pairing[1/|X|]", abs(lhs - rhs) / abs(lhs), tol(1e-5)))
    return out


def _suite_qft(tol):
    out = []
    s = testfunc.SrtfParams(mu2=2.0)
    for D, t in ((4, 1e-5), (2, 1e-6)):
        out.append(_record("qft", f"delta0_euclid[D={D}]", qft.delta0_euclid(D, 1.0, s).rel_deviation, tol(t)))
    out.append(_record("qft", "delta0_minkowski[D=2]", qft.delta0_minkowski(2, 1.0, s).rel_deviation, tol(1e-4)))
    for k2 in (0.5, 1.0, 10.0):
        out.append(_record("qft", f"one_loop[k2={k2}]", qft.one_loop_I(k2, 1.0, s).rel_deviation, tol(1e-5)))
    a, b = qft.pv_decomposition(1.0, [2.0, 3.0], 5.0)
    out.append(_record("qft", "pv_decomposition", abs(a - b) / abs(a), tol(1e-10)))
    return out


def _suite_split(tol):
    out = []
    cases = [("lorentzian", 0, 0), ("gaussian", 1, 0), ("polyrational", 2, 2)]
    for name, omega, degree in cases:
        model = split.model_distribution(name, omega, degree=degree)
        gap = max(split.splitting_difference_check(model, p, 2.0).gap for p in (-0.7, 1.0, 3.0))
        out.append(_record("split", f"dispersion_identity[{model.name},omega={omega}]", gap, tol(1e-4)))
    lhs, rhs = split.t_integral_closed(1.0, 5.0, 0, 2.0)
    out.append(_record("split", "t_integral[omega=0]", abs(lhs - rhs), tol(1e-9)))
    direct, dist = split.smeared_theta_check(0.8)
    out.append(_record("split", "theta_v_smeared", abs(direct - dist), tol(1e-6)))
    return out


_SUITES = {"partition": _suite_partition, "lagrange": _suite_lagrange, "extend": _suite_extend,
           "qft": _suite_qft, "split": _suite_split}


def run_verify(suite: str, environ=None) -> dict:
    environ = os.environ if environ is None else environ
    if suite not in SUITES:
        raise InputError(f"unknown suite {suite!r}; choose from {SUITES}")
    override = environ.get("CAUSAL_VERIFY_TOL")
    if override is not None:
        try:
            forced = float(override)
        except ValueError:
            raise InputError(f"CAUSAL_VERIFY_TOL is not a number: {override!r}") from None

        def tol(default):
            return forced
    else:
        def tol(default):
            return default
    names = list(_SUITES) if suite == "all" else [suite]
    start = time.perf_counter()
    records = []
    for name in names:
        records.extend(_SUITES[name](tol))
    return {"suite": suite, "passed": all(r["passed"] for r in records),
            "n_records": len(records), "n_failed": sum(not r["passed"] for r in records),
            "wall_seconds": round(time.perf_counter() - start, 3), "records": records}


# -- entry point ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pouext", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value configuration file")
    common.add_argument("--output", "-o", help="output path, '-' for stdout")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--plot", action="store_const", const=True, help="also write a plot-script file")
    common.add_argument("--no-timestamp", dest="no_timestamp", action="store_const", const=True,
                        help="omit the timestamp header line")
    common.add_argument("--workers", type=int)
    for name in ("m", "alpha", "Lambda", "rel_tol"):
        common.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float)
    common.add_argument("--mu2")
    common.add_argument("--D", dest="D", type=int)
    common.add_argument("--max-subdiv", dest="max_subdiv", type=int)
    common.add_argument("--variant", choices=(testfunc.NU_INTEGRAL, testfunc.CONVOLUTION))
    common.add_argument("--alpha-limit", dest="alpha_limit", action="store_const", const=True)

    p = sub.add_parser("testfn", parents=[common], help="tabulate the test function")
    p.add_argument("--X")
    p.add_argument("--order", type=int)
    p = sub.add_parser("extend", parents=[common], help="tabulate an extended distribution")
    p.add_argument("--distribution", choices=sorted(extend.BUILTINS))
    p.add_argument("--regime", choices=("ir", "uv", "uv_alt"))
    p.add_argument("--k", type=int)
    p.add_argument("--X")
    p = sub.add_parser("propagator", parents=[common], help="coincident-point propagator")
    p.add_argument("--metric", choices=("euclid", "minkowski"))
    p = sub.add_parser("loop4", parents=[common], help="one-loop four-point integral")
    p.add_argument("--k2")
    p = sub.add_parser("sunset", parents=[common], help="two-loop sunset cutoff scan")
    p.add_argument("--cutoff")
    p = sub.add_parser("scan-mu", parents=[common], help="scan an observable over mu2")
    p.add_argument("--obs", choices=("delta0", "delta0_minkowski", "loop4", "sunset"))
    p.add_argument("--metric", choices=("euclid", "minkowski"))
    p.add_argument("--k2")
    p = sub.add_parser("dispersion-check", parents=[common], help="retarded/advanced splitting check")
    p.add_argument("--model", choices=split.MODELS)
    p.add_argument("--omega", type=int)
    p.add_argument("--degree", type=int)
    p.add_argument("--p")
    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("suite", nargs="?", default="all", choices=SUITES)
    p.add_argument("--output", "-o", default="-")
    return parser


def _write(path: str, text: str, stdout):
    if path == "-":
        stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _fail(code: int, exc: BaseException, stderr) -> int:
    record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    stderr.write(json.dumps(record) + "\n")
    return code


def main(argv=None, *, environ=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    if args.subcommand is None:
        parser.print_help(stderr)
        return EXIT_CONFIG
    try:
        if args.subcommand == "verify":
            report = run_verify(args.suite, environ)
            _write(args.output, render_json(report), stdout)
            return EXIT_OK if report["passed"] else EXIT_VERIFY
        flags = {k: v for k, v in vars(args).items() if k not in ("subcommand", "config")}
        params = resolve_params(flags, args.config, environ)
        cfg = RunConfig(args.subcommand, {k: v for k, v in params.items()
                                          if k not in ("output", "format", "plot", "no_timestamp", "workers")},
                        params["output"], params["format"], params["plot"])
        if cfg.format not in ("csv", "json"):
            raise InputError(f"format must be csv or json, got {cfg.format!r}")
        report = _HANDLERS[args.subcommand](params, cfg)
        report.sort()
        report.provenance = {"version": _version(), "config_sha256": cfg.digest()}
        if cfg.format == "csv":
            text = render_csv(report, cfg, timestamp=not params["no_timestamp"])
        else:
            text = render_json(report.to_dict())
        _write(cfg.output, text, stdout)
        if cfg.plot:
            base = cfg.output if cfg.output != "-" else args.subcommand
            _write(base + ".plot", plot_script(report, cfg, cfg.output), stdout)
        return EXIT_OK
    except (ConvergenceError, IndeterminateOrderError, ArithmeticError) as exc:
        return _fail(EXIT_NUMERIC, exc, stderr)
    except (InputError, ValueError) as exc:
        return _fail(EXIT_CONFIG, exc, stderr)
    except PouError as exc:
        return _fail(EXIT_NUMERIC, exc, stderr)


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
