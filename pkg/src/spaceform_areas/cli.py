"""Experiment runner: named desk-scale experiments with deterministic
seeding, CSV tables, and a JSON manifest recording every check's value,
threshold, and verdict.

Artifacts: one ``manifest.json`` plus one CSV per computed table, written
to the output directory.  CSV floats are serialized with 17 significant
digits (round-trip exact), UTF-8, LF line endings.  The manifest carries
``schema_version`` 1.  Exit status is nonzero iff any check fails.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import quad

from . import __version__
from .analytics import cf_marginal_cp, levy_cf, winding_limit_cf
from .densities import (
    SeriesControl,
    berger_kernel,
    berger_limit_kernel,
    spherical_density,
)
from .hyperbolic_kernels import (
    QuadratureControl,
    ch1_joint_density,
    ch1_loop_slice,
)
from .simulate import (
    Geometry,
    SimConfig,
    girsanov_cf_estimator,
    sample_area,
    sample_planar_area,
    sample_winding,
)
from .specfun import JacobiParams, jacobi_poly
from .stats import SampleSet, empirical_cf, ks_statistic


class UnknownKeyError(ValueError):
    """A config document contains a key the target schema does not define."""


class ConfigParseError(ValueError):
    """A config document is not well-formed (carries line/column)."""


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    params: dict = field(default_factory=dict)
    output_dir: Path = Path("out")
    master_seed: int = 12345

    def __post_init__(self):
        if self.name not in EXPERIMENT_DEFAULTS:
            raise UnknownKeyError(
                f"unknown experiment {self.name!r}; known: "
                f"{sorted(EXPERIMENT_DEFAULTS)}")
        if not (0 <= self.master_seed < 2 ** 64):
            raise ValueError("master_seed must fit in 64 bits")
        defaults = EXPERIMENT_DEFAULTS[self.name]
        bad = sorted(set(self.params) - set(defaults))
        if bad:
            raise UnknownKeyError(
                f"unknown parameter key(s) {bad} for experiment "
                f"{self.name!r}; known: {sorted(defaults)}")

    def resolved_params(self) -> dict:
        out = dict(EXPERIMENT_DEFAULTS[self.name])
        out.update(self.params)
        return out


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value,
                "threshold": self.threshold,
                "verdict": "pass" if self.passed else "fail"}


@dataclass
class Table:
    name: str
    header: list
    rows: list


@dataclass
class ReportBundle:
    manifest: dict
    tables: list

    @property
    def passed(self) -> bool:
        return all(c["verdict"] == "pass" for c in self.manifest["checks"])


# ---------------------------------------------------------------------------
# configuration parsing

_TOP_LEVEL_KEYS = {"experiment", "params", "output_dir", "master_seed"}


def parse_config(text: str) -> ExperimentSpec:
    """Parse a JSON config document into a fully-resolved ExperimentSpec.

    Unknown top-level or parameter keys are hard errors naming the
    offending key; malformed documents raise ConfigParseError with the
    line and column of the failure.
    """
    if not text.strip():
        raise ConfigParseError("empty config document (line 1, column 1)")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigParseError(
            f"config parse error at line {e.lineno}, column {e.colno}: "
            f"{e.msg}") from e
    if not isinstance(doc, dict):
        raise ConfigParseError("config document must be a JSON object")
    bad = sorted(set(doc) - _TOP_LEVEL_KEYS)
    if bad:
        raise UnknownKeyError(
            f"unknown top-level config key(s) {bad}; known: "
            f"{sorted(_TOP_LEVEL_KEYS)}")
    if "experiment" not in doc:
        raise ConfigParseError("config document must name an 'experiment'")
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ConfigParseError("'params' must be a JSON object")
    kwargs = {"name": doc["experiment"], "params": params}
    if "output_dir" in doc:
        kwargs["output_dir"] = Path(doc["output_dir"])
    if "master_seed" in doc:
        kwargs["master_seed"] = int(doc["master_seed"])
    return ExperimentSpec(**kwargs)


def _coerce_override(value: str):
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        return value


# ---------------------------------------------------------------------------
# small numeric helpers

def _check_abs(name: str, value: float, threshold: float) -> Check:
    return Check(name, float(value), float(threshold),
                 bool(abs(value) <= threshold))


def _check_le(name: str, value: float, threshold: float) -> Check:
    return Check(name, float(value), float(threshold),
                 bool(value <= threshold))


def _check_ge(name: str, value: float, threshold: float) -> Check:
    return Check(name, float(value), float(threshold),
                 bool(value >= threshold))


def _sub_seed(master_seed: int, k: int) -> int:
    # distinct 64-bit seeds per sub-run, stable across platforms
    return (master_seed + 0x9E3779B97F4A7C15 * (k + 1)) % (2 ** 64)


def _normal_cdf(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.vectorize(math.erf)(np.asarray(x) / math.sqrt(2.0)))


def _rodrigues_jacobi(m: int, alpha: float, beta: float, x: float) -> float:
    """High-precision Rodrigues-formula oracle for Jacobi polynomials."""
    import mpmath as mp
    with mp.workdps(40):
        a, b, xx = mp.mpf(alpha), mp.mpf(beta), mp.mpf(x)
        f = lambda s: (1 - s) ** (a + m) * (1 + s) ** (b + m)
        d = mp.diff(f, xx, m)
        val = (-1) ** m / (mp.mpf(2) ** m * mp.factorial(m)) \
            * (1 - xx) ** (-a) * (1 + xx) ** (-b) * d
        return float(val)


def _eigen_residual(m: int, p: JacobiParams, x: float) -> float:
    """Relative error of the finite-difference eigenfunction identity.

    Applies (1-x^2) d^2/dx^2 + (beta - alpha - (alpha+beta+2) x) d/dx to
    the polynomial by central differences at steps h and h/2 with
    Richardson extrapolation, and compares with -m(m+alpha+beta+1) P.
    """
    a, b = p.alpha, p.beta

    def apply_g(h: float) -> float:
        pm = jacobi_poly(m, p, x - h)
        p0 = jacobi_poly(m, p, x)
        pp = jacobi_poly(m, p, x + h)
        d1 = (pp - pm) / (2.0 * h)
        d2 = (pp - 2.0 * p0 + pm) / (h * h)
        return (1.0 - x * x) * d2 + (b - a - (a + b + 2.0) * x) * d1

    h = min(1e-3, 0.25 * (1.0 - abs(x)))
    g = (4.0 * apply_g(h / 2.0) - apply_g(h)) / 3.0
    target = -m * (m + a + b + 1.0) * jacobi_poly(m, p, x)
    scale = max(abs(target), 1.0)
    return abs(g - target) / scale


def _quad_cf_ch1(lam: float, t: float) -> float:
    """CF of the area via 2D quadrature of the n=1 hyperbolic kernel."""
    def inner(r: float) -> float:
        f = lambda th: ch1_joint_density(t, r, th).value * math.cos(lam * th)
        v, _ = quad(f, 0.0, 12.0, limit=200)  # integrand even in theta
        return 2.0 * v * math.pi * math.sinh(2.0 * r)

    v, _ = quad(inner, 0.0, 8.0, limit=100)
    return v


def _quad_cf_planar(lam: float, t: float, nodes: int = 64) -> float:
    """E over the endpoint of levy_cf, by Gauss-Laguerre in |z|^2/t ~ Exp."""
    x, w = np.polynomial.laguerre.laggauss(nodes)
    vals = np.array([levy_cf(lam, t, complex(math.sqrt(2.0 * t * s), 0.0))
                     for s in x])
    return float(np.sum(w * vals))


# ---------------------------------------------------------------------------
# experiment implementations; each returns (tables, checks)

def _exp_jacobi_selftest(params, seed, threads):
    ctl = SeriesControl()
    tables, checks = [], []
    # recurrence vs Rodrigues oracle
    rows = []
    worst = 0.0
    for alpha, beta in ((0.0, 0.0), (1.0, 0.5), (0.7, 2.1), (2.0, 1.3)):
        p = JacobiParams(alpha, beta)
        for m in range(int(params["m_max_oracle"]) + 1):
            for x in (-0.9, -0.2, 0.3, 0.8):
                rec = jacobi_poly(m, p, x)
                orc = _rodrigues_jacobi(m, alpha, beta, x)
                err = abs(rec - orc)
                worst = max(worst, err)
                rows.append([m, alpha, beta, x, rec, orc, err])
    tables.append(Table("jacobi_oracle",
                        ["m", "alpha", "beta", "x", "recurrence", "rodrigues",
                         "abs_err"], rows))
    checks.append(_check_le("rodrigues_oracle_max_abs_err", worst,
                            params["oracle_tol"]))
    # eigenfunction finite-difference identity
    rows = []
    worst = 0.0
    for alpha, beta in ((0.0, 0.0), (1.0, 0.5), (2.0, 1.3)):
        p = JacobiParams(alpha, beta)
        for m in range(int(params["m_max_eig"]) + 1):
            for x in (-0.7, -0.3, 0.1, 0.5, 0.8):
                err = _eigen_residual(m, p, x)
                worst = max(worst, err)
                rows.append([m, alpha, beta, x, err])
    tables.append(Table("jacobi_eigen",
                        ["m", "alpha", "beta", "x", "rel_err"], rows))
    checks.append(_check_le("eigenfunction_max_rel_err", worst,
                            params["eig_tol"]))
    # density normalization
    rows = []
    worst = 0.0
    for alpha, beta in ((0.0, 0.0), (1.0, 0.0), (1.0, 0.7), (2.0, 1.3)):
        p = JacobiParams(alpha, beta)
        for t in (0.2, 0.5, 2.0):
            total, _ = quad(
                lambda r: spherical_density(p, t, 0.0, r, ctl).value,
                0.0, math.pi / 2.0, epsabs=1e-12, epsrel=1e-11, limit=200)
            err = abs(total - 1.0)
            worst = max(worst, err)
            rows.append([alpha, beta, t, total, err])
    tables.append(Table("density_normalization",
                        ["alpha", "beta", "t", "integral", "abs_err"], rows))
    checks.append(_check_le("density_normalization_max_err", worst,
                            params["norm_tol"]))
    return tables, checks


def _exp_cp_area_cf(params, seed, threads):
    t = params["t"]
    lambdas = [float(v) for v in params["lambdas"]]
    paths = int(params["paths"])
    sigma = params["sigma"]
    sctl, qctl = SeriesControl(), QuadratureControl()
    area = sample_area(
        Geometry.cp(int(params["n"])),
        SimConfig(t, params["dt_direct"], paths, seed), threads=threads)
    s = SampleSet(area.theta_end)
    rows, checks = [], []
    for k, lam in enumerate(lambdas):
        ana = cf_marginal_cp(int(params["n"]), lam, t, sctl, qctl)
        gir = girsanov_cf_estimator(
            Geometry.cp(int(params["n"])), lam,
            SimConfig(t, params["dt_girsanov"], paths, _sub_seed(seed, k)),
            threads=threads)
        emp = empirical_cf(s, lam)
        z_ga = (gir.value.real - ana) / gir.std_error
        z_da = (emp.value.real - ana) / emp.std_error
        z_gd = (gir.value.real - emp.value.real) / math.hypot(
            gir.std_error, emp.std_error)
        rows.append([lam, ana, gir.value.real, gir.std_error,
                     emp.value.real, emp.std_error, z_ga, z_da, z_gd])
        checks.append(_check_abs(f"z_girsanov_vs_analytic_lam{lam}", z_ga, sigma))
        checks.append(_check_abs(f"z_direct_vs_analytic_lam{lam}", z_da, sigma))
        checks.append(_check_abs(f"z_girsanov_vs_direct_lam{lam}", z_gd, sigma))
    table = Table("cp_area_cf",
                  ["lambda", "analytic", "girsanov", "girsanov_se",
                   "direct", "direct_se", "z_gir_ana", "z_dir_ana",
                   "z_gir_dir"], rows)
    return [table], checks


def _exp_cp_cauchy_limit(params, seed, threads):
    t = params["t"]
    lambdas = [float(v) for v in params["lambdas"]]
    ns = [int(v) for v in params["ns"]]
    sigma = params["sigma"]
    sctl, qctl = SeriesControl(), QuadratureControl()
    rows, checks = [], []
    for j, n in enumerate(ns):
        area = sample_area(
            Geometry.cp(n),
            SimConfig(t, params["dt"], int(params["paths"]),
                      _sub_seed(seed, j)), threads=threads)
        s = SampleSet(area.theta_end / t)
        worst_ana = 0.0
        for lam in lambdas:
            limit = math.exp(-n * lam)
            ana = cf_marginal_cp(n, lam / t, t, sctl, qctl)
            emp = empirical_cf(s, lam)
            z = (emp.value.real - limit) / emp.std_error
            worst_ana = max(worst_ana, abs(ana - limit))
            rows.append([n, lam, limit, ana, abs(ana - limit),
                         emp.value.real, emp.std_error, z])
            checks.append(_check_abs(f"z_empirical_vs_limit_n{n}_lam{lam}",
                                     z, sigma))
        checks.append(_check_le(f"analytic_vs_limit_max_err_n{n}", worst_ana,
                                params["analytic_tol"]))
    table = Table("cp_cauchy_limit",
                  ["n", "lambda", "limit_cf", "analytic_cf", "analytic_err",
                   "empirical_cf", "empirical_se", "z_emp_limit"], rows)
    return [table], checks


def _exp_ch_area_cf(params, seed, threads):
    t = params["t"]
    lambdas = [float(v) for v in params["lambdas"]]
    paths = int(params["paths"])
    sigma = params["sigma"]
    n = int(params["n"])
    area = sample_area(Geometry.ch(n),
                       SimConfig(t, params["dt"], paths, seed),
                       threads=threads)
    s = SampleSet(area.theta_end)
    rows, checks = [], []
    for k, lam in enumerate(lambdas):
        quad_cf = _quad_cf_ch1(lam, t)
        gir = girsanov_cf_estimator(
            Geometry.ch(n), lam,
            SimConfig(t, params["dt"], paths, _sub_seed(seed, k)),
            threads=threads)
        emp = empirical_cf(s, lam)
        z_gq = (gir.value.real - quad_cf) / gir.std_error
        z_dq = (emp.value.real - quad_cf) / emp.std_error
        z_gd = (gir.value.real - emp.value.real) / math.hypot(
            gir.std_error, emp.std_error)
        rows.append([lam, quad_cf, gir.value.real, gir.std_error,
                     emp.value.real, emp.std_error, z_gq, z_dq, z_gd])
        checks.append(_check_abs(f"z_girsanov_vs_quadrature_lam{lam}", z_gq,
                                 sigma))
        checks.append(_check_abs(f"z_direct_vs_quadrature_lam{lam}", z_dq,
                                 sigma))
        checks.append(_check_abs(f"z_girsanov_vs_direct_lam{lam}", z_gd,
                                 sigma))
    table = Table("ch_area_cf",
                  ["lambda", "quadrature", "girsanov", "girsanov_se",
                   "direct", "direct_se", "z_gir_quad", "z_dir_quad",
                   "z_gir_dir"], rows)
    return [table], checks


def _exp_ch_gaussian_limit(params, seed, threads):
    t = params["t"]
    rows, checks = [], []
    for j, n in enumerate([int(v) for v in params["ns"]]):
        area = sample_area(
            Geometry.ch(n),
            SimConfig(t, params["dt"], int(params["paths"]),
                      _sub_seed(seed, j)), threads=threads)
        s = SampleSet(area.theta_end / math.sqrt(t))
        d, p = ks_statistic(s, _normal_cdf)
        rows.append([n, d, p, float(s.values.mean()), float(s.values.var())])
        checks.append(_check_ge(f"ks_pvalue_n{n}", p, params["p_min"]))
    table = Table("ch_gaussian_limit",
                  ["n", "ks_statistic", "ks_pvalue", "sample_mean",
                   "sample_var"], rows)
    return [table], checks


def _exp_ch1_loop_density(params, seed, threads):
    t = params["t"]
    grid = np.linspace(params["theta_lo"], params["theta_hi"],
                       int(params["points"]))
    rows = []
    worst = 0.0
    for th in grid:
        q = ch1_joint_density(t, 0.0, float(th)).value
        closed = float(ch1_loop_slice(t, float(th)))
        rel = abs(q - closed) / abs(closed)
        worst = max(worst, rel)
        rows.append([float(th), q, closed, rel])
    table = Table("ch1_loop_density",
                  ["theta", "quadrature", "closed_form", "rel_err"], rows)
    return [table], [_check_le("loop_density_max_rel_err", worst,
                               params["tol"])]


def _exp_berger_homogenisation(params, seed, threads):
    n = int(params["n"])
    t = params["t"]
    lam = params["lam"]
    ctl = SeriesControl()
    r_grid = np.linspace(0.12, 1.45, 5)
    th_grid = np.linspace(0.0, 2.0 * math.pi, 5, endpoint=False)
    rows = []
    worst = 0.0
    for r in r_grid:
        lim = berger_limit_kernel(n, t, float(r), ctl).value
        for th in th_grid:
            v = berger_kernel(n, lam, t, float(r), float(th), ctl).value
            diff = abs(v - lim)
            worst = max(worst, diff)
            rows.append([float(r), float(th), v, lim, diff])
    tables = [Table("berger_homogenisation",
                    ["r", "theta", "kernel", "limit_kernel", "abs_diff"],
                    rows)]
    checks = [_check_le("homogenisation_max_abs_diff", worst, params["tol"])]
    # kernel normalization against its fiber-averaged reference measure
    pref = 2.0 * math.pi ** n / math.gamma(n)

    def radial(r):
        return (berger_kernel(n, lam, t, r, 0.3, ctl).value
                * pref * math.sin(r) ** (2 * n - 1) * math.cos(r))

    # the kernel is independent of theta up to the homogenisation error, so
    # normalize the theta-average via a single slice times 2 pi
    total, _ = quad(radial, 0.0, math.pi / 2.0, epsabs=1e-12, epsrel=1e-11,
                    limit=200)
    total *= 2.0 * math.pi
    checks.append(_check_le("kernel_normalization_err", abs(total - 1.0),
                            params["norm_tol"]))
    tables.append(Table("berger_normalization",
                        ["lam", "t", "integral", "abs_err"],
                        [[lam, t, total, abs(total - 1.0)]]))
    return tables, checks


def _exp_winding_cp1(params, seed, threads):
    t = params["t"]
    lam = params["lam"]
    w = sample_winding(
        Geometry.cp(1), params["r0"],
        SimConfig(t, params["dt"], int(params["paths"]), seed),
        threads=threads)
    s = SampleSet(w.phi_end / t)
    emp = empirical_cf(s, lam)
    limit = winding_limit_cf(Geometry.cp(1), params["r0"], lam)
    mean = float(w.phi_end.mean())
    mean_se = float(w.phi_end.std(ddof=1)) / math.sqrt(w.phi_end.size)
    table = Table("winding_cp1",
                  ["lambda", "limit_cf", "empirical_cf", "empirical_se",
                   "abs_diff"],
                  [[lam, limit, emp.value.real, emp.std_error,
                    abs(emp.value.real - limit)]])
    checks = [
        _check_le("cauchy2_cf_abs_diff", abs(emp.value.real - limit),
                  params["tol"]),
        _check_abs("winding_mean_z", mean / mean_se, params["sigma"]),
    ]
    return [table], checks


def _exp_winding_ch1(params, seed, threads):
    t = params["t"]
    sigma = params["sigma"]
    rows, checks = [], []
    for j, r0 in enumerate([float(v) for v in params["r0s"]]):
        w = sample_winding(
            Geometry.ch(1), r0,
            SimConfig(t, params["dt"], int(params["paths"]),
                      _sub_seed(seed, j)), threads=threads)
        s = SampleSet(w.phi_end)
        for lam in [float(v) for v in params["lambdas"]]:
            limit = winding_limit_cf(Geometry.ch(1), r0, lam)
            emp = empirical_cf(s, lam)
            z = (emp.value.real - limit) / emp.std_error
            rows.append([r0, lam, limit, emp.value.real, emp.std_error, z])
            checks.append(_check_abs(f"z_winding_r0{r0}_lam{lam}", z, sigma))
    table = Table("winding_ch1",
                  ["r0", "lambda", "limit_cf", "empirical_cf",
                   "empirical_se", "z"], rows)
    return [table], checks


def _exp_levy_baseline(params, seed, threads):
    t = params["t"]
    lam = params["lam"]
    z_end, s_end = sample_planar_area(
        t, SimConfig(t, params["dt"], int(params["paths"]), seed),
        threads=threads)
    emp = empirical_cf(SampleSet(s_end), lam)
    quad_cf = _quad_cf_planar(lam, t)
    closed = 1.0 / math.cosh(lam * t)
    z = (emp.value.real - quad_cf) / emp.std_error
    table = Table("levy_baseline",
                  ["lambda", "t", "quadrature", "closed_form", "empirical",
                   "empirical_se", "z"],
                  [[lam, t, quad_cf, closed, emp.value.real, emp.std_error,
                    z]])
    checks = [
        _check_abs("z_mc_vs_quadrature", z, params["sigma"]),
        _check_le("quadrature_vs_closed_form",
                  abs(quad_cf - closed), 1e-8),
    ]
    return [table], checks


EXPERIMENT_DEFAULTS = {
    "jacobi-selftest": {
        "m_max_oracle": 6, "m_max_eig": 8, "oracle_tol": 1e-8,
        "eig_tol": 1e-6, "norm_tol": 1e-8,
    },
    "cp-area-cf": {
        "n": 1, "t": 1.0, "lambdas": (0.5, 1.0, 2.0), "paths": 100000,
        "dt_direct": 1e-3, "dt_girsanov": 2e-3, "sigma": 3.0,
    },
    "cp-cauchy-limit": {
        "t": 50.0, "ns": (1, 2), "lambdas": (0.25, 0.5, 1.0, 2.0),
        "paths": 10000, "dt": 0.01, "analytic_tol": 5e-3, "sigma": 3.0,
    },
    "ch-area-cf": {
        "n": 1, "t": 1.0, "lambdas": (0.5, 1.0), "paths": 100000,
        "dt": 1e-3, "sigma": 3.0,
    },
    "ch-gaussian-limit": {
        "t": 50.0, "ns": (1, 2, 3), "paths": 10000, "dt": 0.01,
        "p_min": 0.01,
    },
    "ch1-loop-density": {
        "t": 1.0, "theta_lo": -3.0, "theta_hi": 3.0, "points": 21,
        "tol": 1e-4,
    },
    "berger-homogenisation": {
        "n": 1, "t": 0.5, "lam": 50.0, "tol": 1e-6, "norm_tol": 1e-6,
    },
    "winding-cp1": {
        "t": 30.0, "r0": math.pi / 4.0, "lam": 1.0, "paths": 10000,
        "dt": 0.01, "tol": 0.05, "sigma": 3.0,
    },
    "winding-ch1": {
        "t": 100.0, "r0s": (0.5, 1.0), "lambdas": (0.5, 1.0, 2.0),
        "paths": 10000, "dt": 0.01, "sigma": 3.0,
    },
    "levy-baseline": {
        "t": 1.0, "lam": 1.0, "paths": 100000, "dt": 1e-3, "sigma": 3.0,
    },
}

_EXPERIMENT_RUNNERS = {
    "jacobi-selftest": _exp_jacobi_selftest,
    "cp-area-cf": _exp_cp_area_cf,
    "cp-cauchy-limit": _exp_cp_cauchy_limit,
    "ch-area-cf": _exp_ch_area_cf,
    "ch-gaussian-limit": _exp_ch_gaussian_limit,
    "ch1-loop-density": _exp_ch1_loop_density,
    "berger-homogenisation": _exp_berger_homogenisation,
    "winding-cp1": _exp_winding_cp1,
    "winding-ch1": _exp_winding_ch1,
    "levy-baseline": _exp_levy_baseline,
}


# ---------------------------------------------------------------------------
# artifact emission

def _fmt_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _write_csv(path: Path, table: Table) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(table.header) + "\n")
        for row in table.rows:
            f.write(",".join(_fmt_cell(v) for v in row) + "\n")


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> ReportBundle:
    """Execute the named experiment, write its artifacts, return the bundle.

    Numeric failures inside the experiment are recorded in the manifest as
    a failed 'completed' check rather than crashing the runner.
    """
    params = spec.resolved_params()
    out_dir = Path(spec.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    error = None
    try:
        tables, checks = _EXPERIMENT_RUNNERS[spec.name](
            params, spec.master_seed, threads)
    except Exception as e:  # noqa: BLE001 - recorded in the manifest
        tables = []
        checks = [Check("completed", math.nan, 0.0, False)]
        error = f"{type(e).__name__}: {e}"
    wall = time.perf_counter() - start
    manifest = {
        "schema_version": 1,
        "experiment": spec.name,
        "config": {k: (list(v) if isinstance(v, tuple) else v)
                   for k, v in params.items()},
        "master_seed": spec.master_seed,
        "threads": threads,
        "library_version": __version__,
        "wall_time_s": wall,
        "checks": [c.as_dict() for c in checks],
    }
    if error is not None:
        manifest["error"] = error
    manifest["passed"] = all(c.passed for c in checks)
    for table in tables:
        _write_csv(out_dir / f"{table.name}.csv", table)
    with open(out_dir / "manifest.json", "w", encoding="utf-8",
              newline="\n") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return ReportBundle(manifest=manifest, tables=tables)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="spaceform-areas",
        description="Run a named stochastic-area/winding experiment and "
                    "emit CSV tables plus a JSON manifest.")
    ap.add_argument("--experiment", help="experiment name")
    ap.add_argument("--config", help="path to a JSON config document")
    ap.add_argument("--seed", type=int, help="master seed override")
    ap.add_argument("--out", help="output directory override")
    ap.add_argument("--threads", type=int, default=1,
                    help="Monte Carlo worker threads (results are "
                         "schedule-independent)")
    ap.add_argument("--override", action="append", default=[],
                    metavar="KEY=VALUE",
                    help="parameter override (repeatable)")
    args = ap.parse_args(argv)

    try:
        if args.config is not None:
            spec = parse_config(Path(args.config).read_text(encoding="utf-8"))
        elif args.experiment is not None:
            spec = ExperimentSpec(name=args.experiment)
        else:
            ap.error("either --experiment or --config is required")
        name = args.experiment or spec.name
        params = dict(spec.params)
        for ov in args.override:
            if "=" not in ov:
                raise ValueError(f"override {ov!r} is not KEY=VALUE")
            key, _, val = ov.partition("=")
            params[key] = _coerce_override(val)
        spec = ExperimentSpec(
            name=name,
            params=params,
            output_dir=Path(args.out) if args.out else spec.output_dir,
            master_seed=args.seed if args.seed is not None
            else spec.master_seed,
        )
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    bundle = run_experiment(spec, threads=args.threads)
    for c in bundle.manifest["checks"]:
        print(f"[{c['verdict'].upper()}] {spec.name}: {c['name']} = "
              f"{c['value']:.6g} (threshold {c['threshold']:.6g})")
    print(f"{spec.name}: wall {bundle.manifest['wall_time_s']:.2f}s, "
          f"artifacts in {spec.output_dir}")
    return 0 if bundle.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
