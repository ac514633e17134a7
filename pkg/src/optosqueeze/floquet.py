"""Time-periodic linearized dynamics beyond the rotating-wave approximation.

In the interaction picture the drift is a trigonometric polynomial in
``Omega t`` containing harmonics 2 Omega (counter-rotating sidebands and the
third tone) and 4 Omega (third tone only), so the covariance settles into a
steady state with period ``T = pi / Omega``.

The periodic steady state is found by integrating the fundamental matrix
``P`` and the noise integral ``Q`` over one period with RK4 and solving the
fixed-point condition ``V0 = P V0 P^T + Q``; ``method="iterate"`` instead
applies the one-period map repeatedly from a start covariance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, NotConverged, NotHurwitz, NonFinite
from .linalg import is_hurwitz, period_map, solve_lyapunov, solve_stein
from .model import SystemParams
from .rwa import SteadyStateReport, diffusion_matrix, mechanical_report

STEPS_PER_PERIOD = 256

# (b, b^+, d, d^+) -> (X1, X2, U1, U2)
_S2 = math.sqrt(2.0)
MODE_TO_QUADRATURE = np.array([
    [1, 1, 0, 0],
    [-1j, 1j, 0, 0],
    [0, 0, 1, 1],
    [0, 0, -1j, 1j],
]) / _S2
_QUADRATURE_TO_MODE = np.linalg.inv(MODE_TO_QUADRATURE)

_B, _BD, _D, _DD = range(4)


def mode_drift_components(params: SystemParams, rwa: bool = False) -> dict[int, np.ndarray]:
    """Heisenberg-Langevin drift in the mode basis (b, b^+, d, d^+).

    Returns ``{k: C_k}`` with ``M(t) = sum_k C_k exp(i k Omega t)``.  Built
    from

        H = -d^+ (G+ b^+ + G- b) - d^+ (G+ b e^{-2i Omega t} + G- b^+ e^{2i Omega t})
            + G3 e^{3i Omega t} (b e^{-i Omega t} + b^+ e^{i Omega t}) d^+ + h.c.

    with db/dt = i[H, b] - Gamma_M/2 b and dd/dt = i[H, d] - kappa/2 d.
    """
    comps: dict[int, np.ndarray] = {}

    def put(k, row, col, val):
        comps.setdefault(k, np.zeros((4, 4), dtype=complex))[row, col] += val

    def mech(k, col, val):
        # d b/dt gains val * e^{ik Omega t} * a_col; the b^+ row is its adjoint.
        put(k, _B, col, val)
        put(-k, _BD, col ^ 1, np.conj(val))

    def cav(k, col, val):
        put(k, _D, col, val)
        put(-k, _DD, col ^ 1, np.conj(val))

    gp, gm, g3 = params.g_plus, params.g_minus, params.g_three
    put(0, _B, _B, -params.gamma_m / 2)
    put(0, _BD, _BD, -params.gamma_m / 2)
    put(0, _D, _D, -params.kappa / 2)
    put(0, _DD, _DD, -params.kappa / 2)
    mech(0, _D, 1j * gm)
    mech(0, _DD, 1j * gp)
    cav(0, _B, 1j * gm)
    cav(0, _BD, 1j * gp)
    if rwa:
        return comps
    mech(2, _D, 1j * gp)
    mech(2, _DD, 1j * gm)
    cav(-2, _B, 1j * gp)
    cav(2, _BD, 1j * gm)
    if g3:
        mech(4, _DD, -1j * g3)
        mech(-2, _D, -1j * g3)
        cav(2, _B, -1j * g3)
        cav(4, _BD, -1j * g3)
    return comps


@dataclass(frozen=True)
class DriftHarmonics:
    """Real quadrature drift ``A(t) = A0 + sum_k (cos_k cos(k W t) + sin_k sin(k W t))``."""

    static: np.ndarray
    cos: dict[int, np.ndarray] = field(default_factory=dict)
    sin: dict[int, np.ndarray] = field(default_factory=dict)
    omega_m: float = math.inf

    def at(self, t) -> np.ndarray:
        """Drift at a scalar time or stacked drifts for an array of times."""
        t = np.asarray(t, dtype=float)
        A = np.broadcast_to(self.static, t.shape + (4, 4)).copy()
        if math.isinf(self.omega_m):
            return A
        for k in self.cos:
            phase = k * self.omega_m * t
            A += np.cos(phase)[..., None, None] * self.cos[k]
            A += np.sin(phase)[..., None, None] * self.sin[k]
        return A

    def fourier(self, k: int) -> np.ndarray:
        """Complex coefficient of exp(i k Omega t) (k > 0)."""
        return 0.5 * (self.cos.get(k, 0.0) - 1j * self.sin.get(k, 0.0))

    def without_oscillations(self) -> "DriftHarmonics":
        return DriftHarmonics(static=self.static, omega_m=self.omega_m)


def drift_harmonics(params: SystemParams) -> DriftHarmonics:
    rwa = params.rwa
    T, Ti = MODE_TO_QUADRATURE, _QUADRATURE_TO_MODE
    quad = {k: T @ C @ Ti for k, C in mode_drift_components(params, rwa=rwa).items()}
    static = quad.pop(0)
    if np.abs(static.imag).max() > 1e-12:
        raise AssertionError("static quadrature drift is not real")
    cos, sin = {}, {}
    for k in sorted({abs(k) for k in quad}):
        plus = quad.get(k, np.zeros((4, 4), dtype=complex))
        minus = quad.get(-k, np.zeros((4, 4), dtype=complex))
        # C e^{ix} + C' e^{-ix} = (C + C') cos x + i (C - C') sin x
        c, s = plus + minus, 1j * (plus - minus)
        if max(np.abs(c.imag).max(), np.abs(s.imag).max()) > 1e-12:
            raise AssertionError(f"harmonic {k} of the quadrature drift is not real")
        cos[k], sin[k] = c.real, s.real
    return DriftHarmonics(static=static.real, cos=cos, sin=sin, omega_m=params.omega_m)


def build_time_dependent_drift(params: SystemParams, t: float) -> np.ndarray:
    """Quadrature drift A(t) including counter-rotating and third-tone terms."""
    return drift_harmonics(params).at(t)


def drive_period(params: SystemParams) -> float:
    return math.pi / params.omega_m


@dataclass(frozen=True)
class FloquetResult:
    v_avg: np.ndarray
    var_x1_avg: float
    var_x1_min: float
    var_x1_max: float
    periods_to_converge: int
    converged: bool
    report: SteadyStateReport
    spectral_radius: float = 0.0
    samples: np.ndarray | None = None

    @property
    def var_x1(self) -> float:
        return self.var_x1_avg


def _result_from_samples(samples: np.ndarray, periods: int, converged: bool, rho: float,
                         keep: bool) -> FloquetResult:
    body = samples[:-1]  # last sample repeats the first after one period
    v_avg = body.mean(axis=0)
    x1 = 2.0 * body[:, 0, 0]
    return FloquetResult(
        v_avg=v_avg,
        var_x1_avg=float(x1.mean()),
        var_x1_min=float(x1.min()),
        var_x1_max=float(x1.max()),
        periods_to_converge=periods,
        converged=converged,
        report=mechanical_report(v_avg[:2, :2], None, covariance=v_avg),
        spectral_radius=rho,
        samples=samples if keep else None,
    )


def periodic_steady_state(
    params: SystemParams,
    tolerance: float = 1e-8,
    max_periods: int = 100_000,
    steps_per_period: int = STEPS_PER_PERIOD,
    method: str = "direct",
    v0: np.ndarray | None = None,
    harmonics: DriftHarmonics | None = None,
    keep_samples: bool = False,
) -> FloquetResult:
    """Period-averaged steady state of dV/dt = A(t) V + V A(t)^T + D.

    Successive periods are generated with the RK4 one-period map until the
    period-averaged covariance changes by less than ``tolerance`` (max-abs,
    relative).  ``method="direct"`` starts from the exact fixed point of the
    map; ``method="iterate"`` starts from ``v0`` (default: the RWA steady
    state) and relies on relaxation alone.
    """
    if method not in ("direct", "iterate"):
        raise InvalidInput(f"unknown method {method!r}")
    if harmonics is None:
        harmonics = drift_harmonics(params)
    D = diffusion_matrix(params)
    if not is_hurwitz(harmonics.static):
        raise NotHurwitz("RWA drift is not Hurwitz")
    if math.isinf(harmonics.omega_m):
        V = solve_lyapunov(harmonics.static, D).V
        samples = np.array([V, V])
        return _result_from_samples(samples, 0, True, 0.0, keep_samples)

    period = math.pi / harmonics.omega_m
    n = steps_per_period
    times = np.arange(2 * n + 1) * (period / (2 * n))
    pm = period_map(harmonics.at(times), D, period)
    rho = float(np.abs(np.linalg.eigvals(pm.monodromy)).max())
    if method == "direct":
        try:
            start = solve_stein(pm.monodromy, pm.noise)
        except NotHurwitz as exc:
            raise NonFinite(f"parametric instability: {exc}") from exc
    else:
        if rho >= 1.0:
            raise NonFinite(f"parametric instability: one-period map has spectral radius {rho:.12g}")
        start = np.asarray(v0, dtype=float) if v0 is not None else solve_lyapunov(harmonics.static, D).V

    samples = pm.propagate(start)
    prev_avg = samples[:-1].mean(axis=0)
    for period_index in range(2, max_periods + 1):
        samples = pm.propagate(samples[-1])
        if not np.all(np.isfinite(samples)):
            raise NonFinite(f"non-finite covariance after {period_index} periods")
        avg = samples[:-1].mean(axis=0)
        change = np.abs(avg - prev_avg).max() / np.abs(avg).max()
        if change < tolerance:
            return _result_from_samples(samples, period_index, True, rho, keep_samples)
        prev_avg = avg
    raise NotConverged(f"period average still changing by {change:.3g} after {max_periods} periods")


def floquet_variance(params: SystemParams, **kwargs) -> float:
    """Period-averaged 2<X1^2>; RWA parameters fall back to the Lyapunov value."""
    return periodic_steady_state(params, **kwargs).var_x1_avg


def optimized_squeezing_vs_cooperativity(base: SystemParams, coop_grid, third_tone: bool = False,
                                         jobs: int = 1, **optimize_kwargs):
    """Optimize G+/G- against the Floquet variance for each cooperativity.

    ``base`` supplies kappa, gamma_m, n_th and omega_m; its couplings are
    ignored.  Each record carries the bad-cavity validity flag.
    """
    from .optimize import FLOQUET, sweep

    return sweep(FLOQUET, coop_grid, kappa=base.kappa, gamma_m=base.gamma_m, n_th=base.n_th,
                 omega_m=base.omega_m, third_tone=third_tone, jobs=jobs, **optimize_kwargs)
