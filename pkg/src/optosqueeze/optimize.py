"""Drive-ratio optimization at fixed cooperativity and cooperativity sweeps."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidInput, NoInteriorMinimum, NumericalFailure, SqueezeError
from .model import INFINITE, SystemParams, check_bad_cavity_condition, params_from_cooperativity
from .rwa import min_variance_analytic, optimal_ratio_analytic

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_BOUNDS = (1e-6, 1.0 - 1e-9)
TIE_TOLERANCE = 1e-15


@dataclass(frozen=True)
class Backend:
    """A variance model: ``evaluate(params)`` returns (2<X1^2>, n_eff, <beta^+ beta>)."""

    name: str
    evaluate: Callable[[SystemParams], tuple[float, float, float]]

    def variance(self, params: SystemParams) -> float:
        return self.evaluate(params)[0]


def _rwa_eval(params):
    from .rwa import steady_state

    rep = steady_state(params)
    return rep.var_x1, rep.n_eff, rep.beta_occupancy


def _lindblad_eval(params):
    from .lindblad import lindblad_steady_state

    rep = lindblad_steady_state(params)
    return rep.var_x1, rep.n_eff, rep.beta_occupancy


def _floquet_eval(params):
    from .floquet import periodic_steady_state

    res = periodic_steady_state(params)
    return res.var_x1_avg, res.report.n_eff, math.nan


RWA = Backend("rwa", _rwa_eval)
LINDBLAD = Backend("lindblad", _lindblad_eval)
FLOQUET = Backend("floquet", _floquet_eval)
BACKENDS = {b.name: b for b in (RWA, LINDBLAD, FLOQUET)}


def get_backend(backend: Backend | str) -> Backend:
    if isinstance(backend, Backend):
        return backend
    try:
        return BACKENDS[backend]
    except KeyError:
        raise InvalidInput(f"unknown backend {backend!r}; choose from {sorted(BACKENDS)}") from None


# -- one-dimensional search -------------------------------------------------

@dataclass(frozen=True)
class RatioOptimum:
    ratio_opt: float
    var_opt: float
    grid_ratios: np.ndarray
    grid_values: np.ndarray
    evaluations: int


def scan_grid(bounds, points: int, spacing: str = "log1m") -> np.ndarray:
    """Scan points in (lo, hi), either uniform or uniform in log(1 - ratio).

    The log spacing puts most points close to ratio -> 1, where optimal
    minima sit at large cooperativity and become very narrow.
    """
    lo, hi = bounds
    if not (0.0 <= lo < hi < 1.0):
        raise InvalidInput(f"ratio bounds must satisfy 0 <= lo < hi < 1, got {bounds}")
    if points < 3:
        raise InvalidInput("need at least 3 scan points")
    if spacing == "linear":
        return np.linspace(lo, hi, points)
    if spacing == "log1m":
        return 1.0 - np.logspace(math.log10(1.0 - lo), math.log10(1.0 - hi), points)
    raise InvalidInput(f"unknown grid spacing {spacing!r}")


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float, max_iter: int = 200):
    """Minimize a unimodal f on [a, b] until the bracket is shorter than tol.

    Returns (x, f(x), evaluations).
    """
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    evals = 2
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        evals += 1
    return (c, fc, evals) if fc <= fd else (d, fd, evals)


def _safe(objective):
    failures = []

    def wrapped(x):
        try:
            v = objective(x)
        except NumericalFailure as exc:
            failures.append(exc)
            return math.inf
        return v if math.isfinite(v) else math.inf

    return wrapped, failures


def optimize_ratio(
    objective: Callable[[float], float],
    bounds=DEFAULT_BOUNDS,
    tol: float = 1e-6,
    grid_points: int = 200,
    spacing: str = "log1m",
) -> RatioOptimum:
    """Coarse scan to bracket the global interior minimum, then golden section.

    Points where the objective raises a numerical failure (e.g. a parametric
    instability near ratio -> 1) are treated as +inf; if every scan point
    fails the first failure is re-raised.
    """
    f, failures = _safe(objective)
    grid = scan_grid(bounds, grid_points, spacing)
    vals = np.array([f(x) for x in grid])
    if not np.isfinite(vals).any():
        raise failures[0] if failures else NumericalFailure("objective is nowhere finite")
    vmin = vals.min()
    i = int(np.flatnonzero(vals <= vmin + TIE_TOLERANCE * max(1.0, abs(vmin)))[0])
    if i == 0 or i == len(grid) - 1:
        raise NoInteriorMinimum(
            f"scan minimum {vmin:.6g} at bound ratio={grid[i]:.9g}", ratio=float(grid[i]), value=float(vmin)
        )
    x, fx, evals = golden_section(f, grid[i - 1], grid[i + 1], tol)
    if fx > vals[i]:
        x, fx = grid[i], vals[i]
    return RatioOptimum(ratio_opt=float(x), var_opt=float(fx), grid_ratios=grid, grid_values=vals,
                        evaluations=len(grid) + evals)


def ratio_objective(backend: Backend | str, coop: float, kappa: float = 1.0, gamma_m: float = 1e-4,
                    n_th: float = 0.0, omega_m: float = INFINITE, third_tone: bool = False):
    b = get_backend(backend)

    def objective(ratio: float) -> float:
        return b.variance(params_from_cooperativity(coop, ratio, kappa, gamma_m, n_th, omega_m, third_tone))

    return objective


# -- sweeps -------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRecord:
    coop: float
    ratio_opt: float
    var_x1_opt: float
    var_x1_analytic: float
    n_eff: float
    beta_occ: float
    backend: str
    bad_cavity_ok: bool | None
    regime_warning: bool
    status: str
    wall_time_ms: float

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def _sweep_point(args) -> SweepRecord:
    backend, coop, kappa, gamma_m, n_th, omega_m, third_tone, opt_kwargs = args
    start = time.perf_counter()
    analytic = min_variance_analytic(coop, n_th, gamma_m / kappa)
    regime = optimal_ratio_analytic(coop, n_th).regime_warning
    validity = None
    if not math.isinf(omega_m):
        probe = params_from_cooperativity(coop, 0.0, kappa, gamma_m, n_th, omega_m)
        validity = check_bad_cavity_condition(probe).satisfied
    nan = math.nan
    try:
        objective = ratio_objective(backend, coop, kappa, gamma_m, n_th, omega_m, third_tone)
        best = optimize_ratio(objective, **opt_kwargs)
        params = params_from_cooperativity(coop, best.ratio_opt, kappa, gamma_m, n_th, omega_m, third_tone)
        var, n_eff, occ = backend.evaluate(params)
        ratio, status = best.ratio_opt, "ok"
    except SqueezeError as exc:
        ratio = var = n_eff = occ = nan
        status = f"{type(exc).__name__}: {exc}"
    return SweepRecord(
        coop=coop,
        ratio_opt=ratio,
        var_x1_opt=var,
        var_x1_analytic=analytic,
        n_eff=n_eff,
        beta_occ=occ,
        backend=backend.name,
        bad_cavity_ok=validity,
        regime_warning=regime,
        status=status,
        wall_time_ms=1e3 * (time.perf_counter() - start),
    )


def sweep(backend: Backend | str, coop_grid, kappa: float = 1.0, gamma_m: float = 1e-4, n_th: float = 0.0,
          omega_m: float = INFINITE, third_tone: bool = False, jobs: int = 1, **opt_kwargs) -> list[SweepRecord]:
    """One optimized record per cooperativity, in grid order.

    A failing point yields a record with NaN values and the error in
    ``status``; the sweep itself never aborts.
    """
    coops = [float(c) for c in coop_grid]
    if any(b <= a for a, b in zip(coops, coops[1:])):
        raise InvalidInput("cooperativity grid must be strictly ascending")
    b = get_backend(backend)
    tasks = [(b, c, kappa, gamma_m, n_th, omega_m, third_tone, opt_kwargs) for c in coops]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_point, tasks))
    return [_sweep_point(t) for t in tasks]
