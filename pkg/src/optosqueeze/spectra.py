"""Cavity output spectrum in the RWA, its integrated weight and the
squeezing bounds that follow from it.

Spectra use ``S[w] = int dt e^{iwt} <da_out^+(t) da_out(0)>`` with ``w`` the
detuning from the cavity resonance and ``a_out = sqrt(kappa) a - a_in``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import QuadratureNotConverged, SingularResponse
from .floquet import mode_drift_components
from .model import SystemParams, derive

ANALYTIC = "analytic"
TRANSFER_MATRIX = "transfer-matrix"


@dataclass(frozen=True)
class SpectrumSeries:
    omega: np.ndarray
    s: np.ndarray
    params: SystemParams
    method: str

    def peaks(self) -> np.ndarray:
        """Frequencies of interior local maxima."""
        s = self.s
        idx = np.where((s[1:-1] > s[:-2]) & (s[1:-1] >= s[2:]))[0] + 1
        return self.omega[idx]


def _grid(omega_grid) -> np.ndarray:
    w = np.asarray(omega_grid, dtype=float)
    if w.ndim != 1 or (w.size > 1 and np.any(np.diff(w) <= 0)):
        raise ValueError("omega grid must be one-dimensional and strictly increasing")
    return w


def spectrum_closed_form(params: SystemParams, omega) -> np.ndarray:
    k, g = params.kappa, params.gamma_m
    gp, gm, n = params.g_plus, params.g_minus, params.n_th
    omega = np.asarray(omega, dtype=float)
    denom = 4 * (gm * gm - gp * gp) + (g - 2j * omega) * (k - 2j * omega)
    return 16 * k * g * (gp * gp * (n + 1) + gm * gm * n) / np.abs(denom) ** 2


def output_spectrum_analytic(params: SystemParams, omega_grid) -> SpectrumSeries:
    w = _grid(omega_grid)
    return SpectrumSeries(omega=w, s=spectrum_closed_form(params, w), params=params, method=ANALYTIC)


def _input_correlations(params: SystemParams) -> np.ndarray:
    # <xi_i xi_j> over (b_in, b_in^+, d_in, d_in^+), per unit delta.
    N = np.zeros((4, 4))
    N[0, 1] = params.n_th + 1
    N[1, 0] = params.n_th
    N[2, 3] = 1.0
    return N


def _output_rows(M: np.ndarray, K: np.ndarray, sqrt_kappa: float, w: float) -> np.ndarray:
    """Rows (a_out, a_out^+) of the map from input noises to outputs at w."""
    R = -1j * w * np.eye(4) - M
    try:
        chi = np.linalg.solve(R, K)
    except np.linalg.LinAlgError as exc:
        raise SingularResponse(f"response matrix singular at omega={w}") from exc
    if not np.all(np.isfinite(chi)):
        raise SingularResponse(f"response matrix singular at omega={w}")
    out = sqrt_kappa * chi[2:4, :]
    out[0, 2] -= 1.0
    out[1, 3] -= 1.0
    return out


def output_spectrum_numeric(params: SystemParams, omega_grid) -> SpectrumSeries:
    """Normally ordered output spectrum from the linear response of all four modes."""
    w = _grid(omega_grid)
    M = mode_drift_components(params, rwa=True)[0]
    K = np.diag(np.sqrt([params.gamma_m, params.gamma_m, params.kappa, params.kappa])).astype(complex)
    N = _input_correlations(params)
    sk = math.sqrt(params.kappa)
    s = np.empty_like(w)
    for i, wi in enumerate(w):
        plus = _output_rows(M, K, sk, wi)
        minus = _output_rows(M, K, sk, -wi)
        s[i] = (plus[1] @ N @ minus[0]).real
    return SpectrumSeries(omega=w, s=s, params=params, method=TRANSFER_MATRIX)


# -- integrated weight ----------------------------------------------------

@dataclass(frozen=True)
class IntegratedWeight:
    area: float
    beta_occ_inferred: float
    window: float
    panels: int


def _simpson(f, a: float, b: float, m: int) -> float:
    x = np.linspace(a, b, 2 * m + 1)
    y = f(x)
    h = (b - a) / (2 * m)
    return h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())


def _graded_integral(f, scale: float, window: float, m: int, tail_tol: float, max_doublings: int):
    """Integral over [0, inf) of an even integrand on the segments
    [0, s], [s, 2s], [2s, 4s], ... with ``m`` Simpson panels each.

    Segments are appended until the window is reached and the last segment
    contributes less than ``tail_tol`` of the running total.  The remaining
    tail beyond the last point L is added as f(L) L / 3, exact for the
    omega^-4 decay of the spectrum.
    """
    total = _simpson(f, 0.0, scale, m)
    lo = scale
    for _ in range(max_doublings):
        part = _simpson(f, lo, 2 * lo, m)
        total += part
        lo *= 2
        if lo >= window and abs(part) <= tail_tol * abs(total):
            return total + float(f(np.array([lo]))[0]) * lo / 3.0, lo
    raise QuadratureNotConverged(f"tail still significant at |omega| = {lo:.3g}")


def integrated_weight(params: SystemParams, window: float | None = None, rtol: float = 1e-9,
                      tail_tol: float = 1e-6, max_panels: int = 1 << 14) -> IntegratedWeight:
    """Area under the analytic spectrum and the beta occupancy it implies.

    The integrand is a rational function with omega^-4 tails; composite
    Simpson on a geometrically graded grid resolves the narrowest
    (mechanics-like) linewidth and the cavity scale at the same time.
    """
    d = derive(params)
    k, g = params.kappa, params.gamma_m
    if window is None:
        window = 50.0 * k
    # Narrowest linewidth: slow root of lambda^2 + (k+g)/2 lambda + k g/4 + G^2.
    half_sum = (k + g) / 4
    disc = half_sum**2 - (k * g / 4 + d.g_eff**2)
    slow = half_sum - math.sqrt(disc) if disc > 0 else half_sum
    scale = max(slow, 1e-300) / 4

    def f(x):
        return spectrum_closed_form(params, x)

    m = 16
    prev, reach = _graded_integral(f, scale, window, m, tail_tol, 200)
    while True:
        m *= 2
        cur, reach = _graded_integral(f, scale, window, m, tail_tol, 200)
        if abs(cur - prev) <= rtol * abs(cur) or cur == 0.0:
            break
        if m >= max_panels:
            raise QuadratureNotConverged(f"Simpson refinement stalled at {m} panels per segment")
        prev = cur
    area = 2.0 * cur
    g2 = d.g_eff**2
    occ = area * (4 * g2 + k * (k + g)) / (8 * math.pi * k * g2)
    return IntegratedWeight(area=area, beta_occ_inferred=occ, window=reach, panels=m)


# -- bounds ---------------------------------------------------------------

@dataclass(frozen=True)
class SqueezingBounds:
    upper: float
    lower: float
    zeta: float
    anomalous_estimate: float
    estimate: float


def squeezing_bounds(r: float, beta_occ: float, n_th: float) -> SqueezingBounds:
    """Bounds on 2<X1^2> from the measured beta occupancy.

    ``upper`` follows from |<bb>| <= <b^+b> + 1/2 and always holds.  ``lower``
    and ``estimate`` rely on the large-r relation between <bb> and <b^+b>.
    """
    if beta_occ < 0:
        raise ValueError(f"beta occupancy must be >= 0, got {beta_occ}")
    e2 = math.exp(-2 * r)
    zeta = 1 + (2 * (1 + n_th) / (1 + 2 * n_th) - 1) * e2
    anomalous = (1 + (4 * (n_th + 1) / (2 * n_th + 1) - 2) * e2) * beta_occ
    return SqueezingBounds(
        upper=2 * e2 * (1 + 2 * beta_occ),
        lower=e2 * (1 + 4 * beta_occ),
        zeta=zeta,
        anomalous_estimate=anomalous,
        estimate=e2 * (1 + 4 * zeta * beta_occ),
    )
