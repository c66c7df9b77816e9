"""Experiment driver: run any scheme from one configuration, sweep eps or dt, fit slopes, write CSV."""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import NamedTuple, Sequence

import numpy as np

from .duhamel import DSA, DSD, DuhamelSolver
from .grids import (
    GAUSSIAN,
    HEAVY_TAIL,
    SpatialGrid,
    VelocityGrid,
    default_velocity_grid,
    density_from_spectral,
    initial_density,
    make_equilibrium,
    to_spectral,
)
from .implicit import ISA, ISD, ImplicitState, ImplicitStepper
from .limits import ADS, DS, LimitConfig, run_limit
from .micromacro import MMSA, MMSD, UPWIND1, MicroMacroState, MicroMacroStepper, stability_max_dt

DSA_CN = "dsa-cn"
DSD_CN = "dsd-cn"
SCHEMES = (ISD, ISA, MMSD, MMSA, DSD, DSA, DSA_CN, DSD_CN, DS, ADS)
KINETIC_SCHEMES = (ISD, ISA, MMSD, MMSA, DSD, DSA)
_ANOMALOUS = (ISA, MMSA, DSA, DSA_CN, ADS)
MICRO_MACRO = (MMSD, MMSA)
CSV_HEADER = ("scheme", "alpha", "eps", "dt", "nx", "nv", "vmax", "error", "slope_or_order", "walltime_s")


@dataclass(frozen=True)
class ExperimentConfig:
    """Shared configuration of every experiment; ``None`` fields take scheme defaults.

    ``eps`` and ``dt`` are scalars for a single run and sequences for sweeps.
    ``reference`` names the comparison scheme (``"ds"``, ``"ads"`` or ``"self"``)
    and ``reference_dt`` its step.
    """

    scheme: str = ADS
    alpha: float | None = None
    eps: float | Sequence[float] = 1e-6
    dt: float | Sequence[float] = 1e-3
    tfinal: float = 0.1
    nx: int | None = None
    nv: int | None = None
    vmax: float | None = None
    equilibrium: str | None = None
    reference: str | None = None
    reference_dt: float | None = None
    stencil: str = UPWIND1
    use_continuous_constants: bool = False
    crank_nicolson: bool = False
    truncate_history: bool = False
    strict_cfl: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {', '.join(SCHEMES)}")
        for name in ("eps", "dt"):
            val = getattr(self, name)
            if np.ndim(val) == 1:
                _check_monotone(val, name)
        if self.tfinal <= 0:
            raise ValueError("tfinal must be positive")

    # resolved defaults -------------------------------------------------------
    @property
    def equilibrium_kind(self) -> str:
        if self.equilibrium is not None:
            return self.equilibrium
        return HEAVY_TAIL if self.scheme in _ANOMALOUS else GAUSSIAN

    @property
    def alpha_value(self) -> float:
        if self.alpha is not None:
            return float(self.alpha)
        return 2.0 if self.equilibrium_kind == GAUSSIAN else 1.5

    @property
    def nx_value(self) -> int:
        if self.nx is not None:
            return int(self.nx)
        return 32 if self.scheme in MICRO_MACRO else 64

    def velocity_grid(self) -> VelocityGrid:
        base = default_velocity_grid(self.equilibrium_kind)
        return VelocityGrid(vmax=self.vmax if self.vmax is not None else base.vmax, nv=self.nv if self.nv is not None else base.nv)

    def build(self):
        """Spatial grid and equilibrium; the heavy tail uses ``beta = alpha + 1``."""
        kind = self.equilibrium_kind
        beta = self.alpha_value + 1.0 if kind == HEAVY_TAIL else None
        return SpatialGrid(self.nx_value), make_equilibrium(kind, self.velocity_grid(), beta)

    @property
    def limit_kind(self) -> str:
        return ADS if self.equilibrium_kind == HEAVY_TAIL else DS


def _check_monotone(vals, name):
    arr = np.asarray(vals, dtype=float)
    if arr.size == 0:
        raise ValueError(f"{name} list is empty")
    d = np.diff(arr)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise ValueError(f"{name} list must be strictly monotone")


def steps_for(tfinal: float, dt: float) -> int:
    """``N`` with ``N dt = T``; raises if ``T`` is not an integer multiple of ``dt``."""
    n = int(round(tfinal / dt))
    if n < 1 or abs(n * dt - tfinal) > 1e-9 * tfinal:
        raise ValueError(f"tfinal={tfinal} is not an integer multiple of dt={dt}")
    return n


def micro_macro_dt(eps: float, alpha: float, dx: float, vmax: float, tfinal: float, diffusion=None) -> float:
    """Default micro-macro step: 1e-4 for eps in [1e-2, 1], 1e-3 below, shrunk to the stable step.

    The stability cap is ``0.9`` times :func:`stability_max_dt`, rounded so that
    ``tfinal`` stays an integer multiple of the step.
    """
    dt = 1e-4 if eps >= 1e-2 else 1e-3
    cap = 0.9 * stability_max_dt(eps, alpha, dx, vmax, diffusion)
    if dt > cap:
        dt = tfinal / math.ceil(tfinal / cap)
    return dt


class ErrorRow(NamedTuple):
    scheme: str
    alpha: float
    eps: float
    dt: float
    nx: int
    nv: int
    vmax: float
    error: float
    slope_or_order: float
    walltime_s: float


class SlopeFit(NamedTuple):
    slope: float
    intercept: float
    residual: float
    npoints: int


@dataclass
class ErrorReport:
    rows: list = field(default_factory=list)
    fit: SlopeFit | None = None
    kind: str = "run"


@dataclass
class RunResult:
    rho: np.ndarray
    rho_hat: np.ndarray
    row: ErrorRow


# --- core runs -----------------------------------------------------------------


def simulate(cfg: ExperimentConfig, eps: float, dt: float):
    """Integrate one scheme to ``tfinal``; returns the spectral density."""
    sgrid, eq = cfg.build()
    n = steps_for(cfg.tfinal, dt)
    alpha = cfg.alpha_value
    s = cfg.scheme
    if s in (ISD, ISA):
        st = ImplicitState.initial(sgrid, eq, eps, dt, alpha)
        return ImplicitStepper(s, sgrid, eq, eps, dt, alpha).run(st, n).rho
    if s in (MMSD, MMSA):
        st = MicroMacroState.initial(sgrid, eq, eps, dt, alpha)
        stepper = MicroMacroStepper(s, sgrid, eq, eps, dt, alpha, stencil=cfg.stencil, strict_cfl=cfg.strict_cfl)
        return to_spectral(stepper.run(st, n).rho)
    if s in (DSD, DSA, DSD_CN, DSA_CN):
        kind = DSD if s in (DSD, DSD_CN) else DSA
        cn = cfg.crank_nicolson or s in (DSD_CN, DSA_CN)
        solver = DuhamelSolver(kind, sgrid, eq, eps, dt, n, alpha, crank_nicolson=cn, truncate=cfg.truncate_history)
        return solver.run().rho[-1]
    return limit_density(cfg, dt, s)


def limit_density(cfg: ExperimentConfig, dt: float, kind: str | None = None):
    sgrid, eq = cfg.build()
    lim = LimitConfig.from_equilibrium(kind or cfg.limit_kind, eq, dt, cfg.use_continuous_constants)
    return run_limit(to_spectral(initial_density(sgrid)), lim, sgrid, steps_for(cfg.tfinal, dt))


def exact_limit_density(cfg: ExperimentConfig, kind: str | None = None):
    """``exp(-sigma(k) T) rho0_hat(k)`` on every mode."""
    sgrid, eq = cfg.build()
    lim = LimitConfig.from_equilibrium(kind or cfg.limit_kind, eq, 1.0, cfg.use_continuous_constants)
    return to_spectral(initial_density(sgrid)) * np.exp(-lim.symbol(sgrid.modes) * cfg.tfinal)


def relative_error(rho_ref, rho_test) -> float:
    """Discrete L2 relative error ``||ref - test|| / ||ref||`` of physical densities."""
    rho_ref, rho_test = np.asarray(rho_ref), np.asarray(rho_test)
    if rho_ref.shape != rho_test.shape:
        raise ValueError("densities live on different grids")
    nref = np.linalg.norm(rho_ref)
    if nref == 0:
        raise ZeroDivisionError("reference density has zero norm")
    return float(np.linalg.norm(rho_ref - rho_test) / nref)


def _scalar(val, name):
    if np.ndim(val) != 0:
        raise ValueError(f"{name} must be a scalar for this experiment")
    return float(val)


def _row(cfg, eps, dt, error, slope, wall):
    vg = cfg.velocity_grid()
    return ErrorRow(cfg.scheme, cfg.alpha_value, float(eps), float(dt), cfg.nx_value, vg.nv, float(vg.vmax), float(error), float(slope), float(wall))


def run_scheme(cfg: ExperimentConfig) -> RunResult:
    """Single run; the error is measured against the limit solver at the same ``dt``
    (against the exact limit solution when the scheme is itself a limit solver)."""
    eps, dt = _scalar(cfg.eps, "eps"), _scalar(cfg.dt, "dt")
    t0 = time.perf_counter()
    rho_hat = simulate(cfg, eps, dt)
    wall = time.perf_counter() - t0
    if cfg.scheme in (DS, ADS):
        ref = exact_limit_density(cfg, cfg.scheme)
    elif cfg.reference == "self":
        raise ValueError("a single run has no self-reference")
    else:
        ref = limit_density(cfg, cfg.reference_dt or dt, cfg.reference)
    rho = density_from_spectral(rho_hat)
    err = relative_error(density_from_spectral(ref), rho)
    return RunResult(rho=rho, rho_hat=rho_hat, row=_row(cfg, eps, dt, err, math.nan, wall))


def _timed(args):
    cfg, eps, dt = args
    t0 = time.perf_counter()
    rho_hat = simulate(cfg, eps, dt)
    return rho_hat, time.perf_counter() - t0


def _map(cfg, jobs):
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(_timed, jobs))
    return [_timed(j) for j in jobs]


def fit_slope(x, y, window=(1e-7, 1e-1)) -> SlopeFit:
    """Least-squares slope of ``log y`` against ``log x`` over points with ``y`` in ``window``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    lo, hi = window
    use = np.isfinite(y) & (y > 0) & (y >= lo) & (y <= hi)
    if use.sum() < 3:
        raise ValueError(f"only {int(use.sum())} usable points for a slope fit (need 3)")
    lx, ly = np.log(x[use]), np.log(y[use])
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, res, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = float(np.sqrt(res[0] / use.sum())) if res.size else 0.0
    return SlopeFit(float(coef[0]), float(coef[1]), resid, int(use.sum()))


def _local_orders(x, y):
    out = [math.nan]
    for i in range(1, len(x)):
        if y[i] > 0 and y[i - 1] > 0:
            out.append(math.log(y[i] / y[i - 1]) / math.log(x[i] / x[i - 1]))
        else:
            out.append(math.nan)
    return out


def sweep_epsilon(cfg: ExperimentConfig, window=(1e-7, 1e-1)) -> ErrorReport:
    """Error against the limit solver at the same ``dt`` for each ``eps``; slope of error vs eps.

    Micro-macro schemes use :func:`micro_macro_dt` per ``eps`` unless ``dt`` is given
    as an explicit scalar override with ``strict_cfl``; the limit reference always
    uses the same step as the run.
    """
    eps_list = [float(e) for e in np.atleast_1d(cfg.eps)]
    dts = [_sweep_dt(cfg, e) for e in eps_list]
    results = _map(cfg, [(cfg, e, d) for e, d in zip(eps_list, dts)])
    errors = []
    for (rho_hat, _), d in zip(results, dts):
        ref = density_from_spectral(limit_density(cfg, d, cfg.reference if cfg.reference in (DS, ADS) else None))
        errors.append(relative_error(ref, density_from_spectral(rho_hat)))
    orders = _local_orders(eps_list, errors)
    rows = [_row(cfg, e, d, err, o, w) for e, d, err, o, (_, w) in zip(eps_list, dts, errors, orders, results)]
    return ErrorReport(rows=rows, fit=fit_slope(eps_list, errors, window), kind="sweep-eps")


def _sweep_dt(cfg, eps):
    if cfg.scheme in MICRO_MACRO and not cfg.strict_cfl:
        sgrid, eq = cfg.build()
        d2 = None
        if cfg.scheme == MMSD:
            d2 = float(np.dot(eq.grid.weights, eq.grid.nodes**2 * eq.values))
        return micro_macro_dt(eps, cfg.alpha_value, sgrid.dx, float(eq.grid.nodes[-1]), cfg.tfinal, d2)
    return _scalar(cfg.dt, "dt")


def sweep_dt(cfg: ExperimentConfig, window=(0.0, math.inf)) -> ErrorReport:
    """Observed time order at fixed ``eps`` against a self-reference at ``dt_min/16``
    (or the limit solver when ``reference`` is ``"ds"``/``"ads"``)."""
    eps = _scalar(cfg.eps, "eps")
    dts = [float(d) for d in np.atleast_1d(cfg.dt)]
    results = _map(cfg, [(cfg, eps, d) for d in dts])
    if cfg.reference in (DS, ADS):
        ref_hat = limit_density(cfg, cfg.reference_dt or min(dts) / 16, cfg.reference)
    else:
        ref_hat = simulate(cfg, eps, cfg.reference_dt or min(dts) / 16)
    ref = density_from_spectral(ref_hat)
    errors = [relative_error(ref, density_from_spectral(r)) for r, _ in results]
    orders = _local_orders(dts, errors)
    rows = [_row(cfg, eps, d, err, o, w) for d, err, o, (_, w) in zip(dts, errors, orders, results)]
    return ErrorReport(rows=rows, fit=fit_slope(dts, errors, window), kind="sweep-dt")


def uniform_study(cfg: ExperimentConfig, reference_mode: str = "fine") -> ErrorReport:
    """Runs along ``dt = eps^alpha`` (``cfg.dt`` is the list) against the limit solver.

    ``reference_mode="fine"`` compares every run with the limit solver at
    ``reference_dt`` (default ``dt_min/16``); ``"same"`` uses the limit solver
    at each run's own step.
    """
    if reference_mode not in ("fine", "same"):
        raise ValueError("reference_mode must be 'fine' or 'same'")
    dts = [float(d) for d in np.atleast_1d(cfg.dt)]
    alpha = cfg.alpha_value
    eps_list = [d ** (1.0 / alpha) for d in dts]
    results = _map(cfg, [(cfg, e, d) for e, d in zip(eps_list, dts)])
    kind = cfg.reference if cfg.reference in (DS, ADS) else None
    if reference_mode == "fine":
        fine = density_from_spectral(limit_density(cfg, cfg.reference_dt or min(dts) / 16, kind))
        refs = [fine] * len(dts)
    else:
        refs = [density_from_spectral(limit_density(cfg, d, kind)) for d in dts]
    errors = [relative_error(ref, density_from_spectral(r)) for ref, (r, _) in zip(refs, results)]
    orders = _local_orders(dts, errors)
    rows = [_row(cfg, e, d, err, o, w) for e, d, err, o, (_, w) in zip(eps_list, dts, errors, orders, results)]
    try:
        fit = fit_slope(dts, errors, (0.0, math.inf))
    except ValueError:
        fit = None
    return ErrorReport(rows=rows, fit=fit, kind="uniform")


def is_uniform(report: ErrorReport, plateau: float = 0.5) -> bool:
    """False when the last error stays above ``plateau`` times the largest one."""
    errs = [r.error for r in report.rows]
    return errs[-1] < plateau * max(errs)


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def emit_csv(report: ErrorReport, path) -> None:
    """Header plus one row per run, floats as shortest round-trip decimals."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in report.rows:
            w.writerow([_fmt(v) for v in row])


def config_from_mapping(data: dict) -> ExperimentConfig:
    known = {f.name for f in fields(ExperimentConfig)}
    extra = set(data) - known
    if extra:
        raise ValueError(f"unknown configuration keys: {', '.join(sorted(extra))}")
    return ExperimentConfig(**data)


def config_to_mapping(cfg: ExperimentConfig) -> dict:
    return asdict(cfg)


__all__ = [
    "ExperimentConfig",
    "ErrorReport",
    "ErrorRow",
    "RunResult",
    "SlopeFit",
    "CSV_HEADER",
    "SCHEMES",
    "emit_csv",
    "exact_limit_density",
    "fit_slope",
    "is_uniform",
    "limit_density",
    "micro_macro_dt",
    "relative_error",
    "run_scheme",
    "simulate",
    "steps_for",
    "sweep_dt",
    "sweep_epsilon",
    "uniform_study",
]
