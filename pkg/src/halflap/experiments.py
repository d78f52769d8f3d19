"""Convergence-rate studies: configuration, sweeps over (z, h), fitting and reports."""

from __future__ import annotations

import csv
import json
import math
import numbers
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import genfunc
from .calculus import SpectralFunction, derive_psi_params
from .lattice import EVEN_VARIANTS, HALF_PLANE
from .normest import CASES, assemble_error, case_kind, operator_norm, residual_certificate
from .operators import get_potential
from .transfer import TransferPlan

DATA_HEADER = ["case", "d", "h", "z_re", "z_im", "norm_estimate", "residual_max", "iterations", "seed"]
RATE_HEADER = ["case", "d", "z_re", "z_im", "slope", "intercept", "r2", "expected", "pass"]

FREE_Z = (-1.0, -4.0, -1.0 + 2.0j)
POTENTIAL_Z = (-1.0 + 2.0j, -1.0 - 2.0j)


class ConfigError(ValueError):
    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


# ----------------------------------------------------------------------------
# configuration


def parse_complex(value):
    if isinstance(value, numbers.Number) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        return complex(value.replace(" ", "").replace("i", "j"))
    raise ValueError(f"cannot read {value!r} as a complex number")


@dataclass(frozen=True)
class ExperimentConfig:
    case: str
    d: int = 1
    h_list: tuple = (2**-3, 2**-4, 2**-5, 2**-6, 2**-7)
    z_list: tuple | None = None
    genfunc: str = "shannon"
    variant: str = HALF_PLANE
    potential: str | None = None
    theta: float | None = None
    psi_s: float | None = None
    psi_alpha: float | None = None
    psi_beta: float | None = None
    L: float = 16.0
    oversample: int = 2
    tol: float = 1e-6
    max_iter: int = 400
    restarts: int = 1
    seed: int = 0
    out_dir: str = "."
    stem: str | None = None

    def __post_init__(self):
        if self.case not in CASES:
            raise ConfigError(f"case must be one of {CASES}, got {self.case!r}", "case")
        if self.d not in (1, 2, 3):
            raise ConfigError(f"d must be 1, 2 or 3, got {self.d}", "d")
        hs = tuple(float(h) for h in self.h_list)
        if len(hs) < 3:
            raise ConfigError("h_list needs at least 3 entries", "h_list")
        if any(h <= 0 for h in hs) or any(a <= b for a, b in zip(hs, hs[1:])):
            raise ConfigError(f"h_list must be positive and strictly decreasing, got {list(hs)}", "h_list")
        for h in hs:
            if abs(round(self.L / h) * h - self.L) > 1e-9 * self.L:
                raise ConfigError(f"L = {self.L} is not a multiple of h = {h}", "L")
        object.__setattr__(self, "h_list", hs)
        if self.variant not in EVEN_VARIANTS:
            raise ConfigError(f"variant must be one of {EVEN_VARIANTS}, got {self.variant!r}", "variant")
        if self.genfunc not in genfunc.GENERATORS:
            raise ConfigError(f"genfunc must be one of {sorted(genfunc.GENERATORS)}", "genfunc")
        if self.case.startswith("potential") and self.potential is None:
            object.__setattr__(self, "potential", "cos-gauss")
        if self.case.startswith("psi") and self.psi_s is None:
            raise ConfigError(f"case {self.case!r} needs psi.s", "psi")
        zs = self.z_list
        if zs is None:
            zs = POTENTIAL_Z if self.case.startswith("potential") else FREE_Z
        zs = tuple(parse_complex(z) for z in zs)
        for z in zs:
            if self.case.startswith("potential") and z.imag == 0:
                raise ConfigError(f"potential cases need Im z != 0, got {z}", "z_list")
            if z.imag == 0 and z.real >= 0:
                raise ConfigError(f"z = {z} lies on [0, inf)", "z_list")
        object.__setattr__(self, "z_list", zs)

    @property
    def bc(self):
        return case_kind(self.case)

    def spectral_function(self):
        if self.psi_s is None:
            return None
        if self.psi_alpha is None:
            return SpectralFunction.power(self.psi_s)
        s = self.psi_s
        return SpectralFunction(
            f"power-{s:g}", lambda lam: np.maximum(lam, 0.0) ** (s / 2), self.psi_alpha, self.psi_beta, s
        )

    def potential_spec(self):
        if self.potential is None:
            return None
        spec = get_potential(self.potential)
        return spec if self.theta is None else replace(spec, theta=self.theta)

    def expected(self):
        """(expected slope, lower band, upper band); upper is inf for one-sided cases."""
        if self.case.startswith("psi"):
            gamma = self.spectral_function().gamma
            if gamma is None:
                gamma = derive_psi_params(self.psi_s).gamma
            return gamma, gamma - 0.2, gamma + 0.3
        if self.case.startswith("potential"):
            tau = genfunc.get(self.genfunc).decay_exponent
            if tau <= self.d:
                return math.nan, math.nan, math.nan
            theta = self.potential_spec().theta
            prime = 1.0 / (1.0 / theta + 1.0 / (tau - self.d))
            return prime, prime - 0.1, math.inf
        slack = 0.2 if self.d == 1 else 0.3
        return 2.0, 2.0 - slack, 2.0 + slack

    def label(self):
        return self.stem or f"{self.case}_d{self.d}"


_KEYS = {f.name for f in ExperimentConfig.__dataclass_fields__.values()}


def _line_of(text, key):
    for i, line in enumerate(text.splitlines(), 1):
        if re.search(rf'"{re.escape(key)}"\s*:', line):
            return i
    return 1


def config_from_mapping(raw, text=""):
    raw = dict(raw)
    psi = raw.pop("psi", None)
    if psi is not None:
        if not isinstance(psi, dict) or "s" not in psi:
            raise ConfigError(f"line {_line_of(text, 'psi')}: psi must be an object with key 's'")
        raw["psi_s"] = float(psi["s"])
        raw["psi_alpha"] = psi.get("alpha")
        raw["psi_beta"] = psi.get("beta")
    ref = raw.pop("reference", None)
    if ref is not None:
        raw["L"] = ref.get("L", 16.0)
        raw["oversample"] = ref.get("oversample", 2)
    for key in raw:
        if key not in _KEYS:
            raise ConfigError(f"line {_line_of(text, key)}: unknown key {key!r}")
    if "case" not in raw:
        raise ConfigError("line 1: missing required key 'case'")
    try:
        return ExperimentConfig(**raw)
    except ConfigError as exc:
        raise ConfigError(f"line {_line_of(text, exc.key or 'case')}: {exc}", exc.key) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"line 1: {exc}") from None


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: line 1: top level must be an object")
    try:
        return config_from_mapping(raw, text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


# ----------------------------------------------------------------------------
# sweep


@dataclass
class Cell:
    z: complex
    h: float
    norm_estimate: float
    residual_max: float
    iterations: int
    seed: int
    converged: bool = True
    error: str | None = None


@dataclass
class Rate:
    z: complex
    slope: float
    intercept: float
    r2: float
    expected: float
    lower: float
    upper: float

    @property
    def passed(self):
        return bool(self.lower <= self.slope <= self.upper)


@dataclass
class RateReport:
    case: str
    d: int
    cells: list = field(default_factory=list)
    rates: list = field(default_factory=list)

    @property
    def passed(self):
        return bool(self.rates) and all(r.passed for r in self.rates)

    def values(self, z):
        return [(c.h, c.norm_estimate) for c in self.cells if c.z == z]


def cell_seed(seed, zi, hi):
    return int(np.random.SeedSequence([seed, zi, hi]).generate_state(1)[0])


def build_plan(config, h):
    g = genfunc.get(config.genfunc)
    return TransferPlan.build(config.d, h, int(round(config.L / h)), g, config.oversample)


def measure_cell(config, z, h, seed):
    plan = build_plan(config, h)
    E = assemble_error(
        config.case, plan, z, psi=config.spectral_function(),
        potential=config.potential_spec(), variant=config.variant,
    )
    est = operator_norm(E, config.tol, config.max_iter, config.restarts, seed)
    # certify both resolvent solves on a random input
    rng = np.random.default_rng(seed)
    f = rng.normal(size=E.shape) + 1j * rng.normal(size=E.shape)
    rhs = plan.discretize_half_array(f, E.mode)
    lat = E.lattice_resolvent
    res_lat = residual_certificate(lat.solve(rhs), rhs, lat.apply_operator, lat.z).value
    ext = E.extension.apply(f)
    con = E.continuum_resolvent
    res_con = residual_certificate(con.solve(ext), ext, con.apply_operator, con.z).value
    return Cell(z, h, est.value, max(res_lat, res_con), est.iterations, seed, est.converged)


def _safe_cell(config, z, h, seed):
    try:
        return measure_cell(config, z, h, seed)
    except Exception as exc:  # recorded per cell, the sweep goes on
        return Cell(z, h, math.nan, math.nan, 0, seed, False, f"{type(exc).__name__}: {exc}")


def fit_rate(points):
    """OLS of log(value) on log(h); returns (slope, intercept, r2)."""
    points = list(points)
    if len(points) < 3:
        raise ValueError(f"need at least 3 points, got {len(points)}")
    for h, v in points:
        if not (h > 0):
            raise ValueError(f"nonpositive mesh size h = {h}")
        if not (v > 0):
            raise ValueError(f"nonpositive value {v} at h = {h}")
    x = np.log([p[0] for p in points])
    y = np.log([p[1] for p in points])
    slope, intercept = np.polyfit(x, y, 1)
    ss_res = float(np.sum((y - (slope * x + intercept)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def rate_for(report, z, band):
    expected, lo, hi = band
    pts = [(h, v) for h, v in report.values(z) if np.isfinite(v) and v > 0]
    try:
        slope, intercept, r2 = fit_rate(pts)
    except ValueError:
        slope = intercept = r2 = math.nan
    return Rate(z, slope, intercept, r2, expected, lo, hi)


def run_case(config, threads=1):
    jobs = [
        (z, h, cell_seed(config.seed, zi, hi))
        for zi, z in enumerate(config.z_list)
        for hi, h in enumerate(config.h_list)
    ]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            cells = list(pool.map(lambda job: _safe_cell(config, *job), jobs))
    else:
        cells = [_safe_cell(config, *job) for job in jobs]
    report = RateReport(config.case, config.d, cells)
    band = config.expected()
    report.rates = [rate_for(report, z, band) for z in config.z_list]
    return report


# ----------------------------------------------------------------------------
# output


def _num(x):
    return repr(float(x))


def emit_csv(report, path):
    """Write the per-cell table to ``path`` and the fitted rates to ``<stem>.rates.csv``."""
    path = Path(path)
    rates_path = path.with_suffix(".rates.csv")
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(DATA_HEADER)
            for c in report.cells:
                w.writerow([
                    report.case, report.d, _num(c.h), _num(c.z.real), _num(c.z.imag),
                    _num(c.norm_estimate), _num(c.residual_max), c.iterations, c.seed,
                ])
        with open(rates_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(RATE_HEADER)
            for r in report.rates:
                w.writerow([
                    report.case, report.d, _num(r.z.real), _num(r.z.imag), _num(r.slope),
                    _num(r.intercept), _num(r.r2), _num(r.expected), str(r.passed).lower(),
                ])
    except OSError as exc:
        raise OSError(f"cannot write report to {exc.filename or path}: {exc.strerror}") from exc
    return path, rates_path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def emit_svg(report, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    zs = [r.z for r in report.rates] or [None]
    fig, axes = plt.subplots(1, len(zs), figsize=(4 * len(zs), 3.5), squeeze=False)
    for ax, rate in zip(axes[0], report.rates):
        pts = np.array([p for p in report.values(rate.z) if np.isfinite(p[1])])
        if pts.size:
            ax.loglog(pts[:, 0], pts[:, 1], "o", label="estimate")
            if np.isfinite(rate.slope):
                hh = np.geomspace(pts[:, 0].min(), pts[:, 0].max(), 50)
                ax.loglog(hh, np.exp(rate.intercept) * hh**rate.slope, "-",
                          label=f"slope {rate.slope:.3f}")
        ax.set_title(f"z = {rate.z.real:g}{rate.z.imag:+g}i")
        ax.set_xlabel("h")
        ax.set_ylabel("norm estimate")
        ax.legend(fontsize=8)
    fig.suptitle(f"{report.case}, d = {report.d}")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return Path(path)
