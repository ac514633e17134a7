"""Rotating-wave steady state of the two-tone driven optomechanical cavity.

Quadrature ordering used by every 4x4 matrix in the package::

    [X1, X2, U1, U2]
    X1 = (b^+ + b)/sqrt2,  X2 = i(b^+ - b)/sqrt2   (mechanics)
    U1 = (d^+ + d)/sqrt2,  U2 = i(d^+ - d)/sqrt2   (cavity)

Covariances are symmetrized, ``V_ij = <{v_i, v_j}>/2``, so the vacuum has
``V = I/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnstableRatio
from .linalg import solve_lyapunov
from .model import SystemParams, derive

QUADRATURES = ("X1", "X2", "U1", "U2")
X1, X2, U1, U2 = range(4)

REGIME_FACTOR = 100.0
"""Asymptotic formulas are flagged when coop < REGIME_FACTOR * (1 + 2 n_th)."""


@dataclass(frozen=True)
class DriftDiffusion:
    A: np.ndarray
    D: np.ndarray


@dataclass(frozen=True)
class SteadyStateReport:
    var_x1: float
    var_x2: float
    cross_x1x2: float
    n_eff: float
    beta_occupancy: float
    beta_anomalous: complex
    covariance: np.ndarray | None = None
    residual_norm: float = 0.0

    @property
    def squeezing_db(self) -> float:
        return -10.0 * math.log10(self.var_x1)

    @property
    def purity_sq(self) -> float:
        """(1 + 2 n_eff)^2, i.e. four times the mechanical determinant."""
        return (1.0 + 2.0 * self.n_eff) ** 2


def diffusion_matrix(params: SystemParams) -> np.ndarray:
    m = params.gamma_m * (params.n_th + 0.5)
    c = params.kappa / 2.0
    return np.diag([m, m, c, c])


def build_rwa_drift_diffusion(params: SystemParams) -> DriftDiffusion:
    gp, gm = params.g_plus, params.g_minus
    A = np.zeros((4, 4))
    A[X1, X1] = A[X2, X2] = -params.gamma_m / 2.0
    A[U1, U1] = A[U2, U2] = -params.kappa / 2.0
    A[X1, U2] = -(gm - gp)
    A[U2, X1] = gm + gp
    A[U1, X2] = -(gm - gp)
    A[X2, U1] = gm + gp
    return DriftDiffusion(A=A, D=diffusion_matrix(params))


def beta_moments(v_mech: np.ndarray, r: float) -> tuple[float, complex]:
    """<beta^+ beta> and <beta beta> from the symmetrized mechanical block.

    beta = b cosh r + b^+ sinh r rescales the quadratures to e^r X1, e^-r X2.
    """
    v11 = math.exp(2 * r) * v_mech[0, 0]
    v22 = math.exp(-2 * r) * v_mech[1, 1]
    occ = 0.5 * (v11 + v22 - 1.0)
    anom = complex(0.5 * (v11 - v22), v_mech[0, 1])
    return occ, anom


def mechanical_report(v_mech: np.ndarray, r: float | None, covariance=None, residual=0.0) -> SteadyStateReport:
    """Summarize a 2x2 symmetrized mechanical covariance (vacuum = I/2).

    ``r=None`` leaves the Bogoliubov moments undefined (NaN), e.g. at the
    QND point g_plus = g_minus.
    """
    v = 0.5 * (v_mech + v_mech.T)
    det4 = 4.0 * (v[0, 0] * v[1, 1] - v[0, 1] ** 2)
    n_eff = 0.5 * (math.sqrt(max(det4, 0.0)) - 1.0)
    if r is None:
        occ, anom = math.nan, complex(math.nan, math.nan)
    else:
        occ, anom = beta_moments(v, r)
    return SteadyStateReport(
        var_x1=2.0 * v[0, 0],
        var_x2=2.0 * v[1, 1],
        cross_x1x2=float(v[0, 1]),
        n_eff=n_eff,
        beta_occupancy=occ,
        beta_anomalous=anom,
        covariance=covariance,
        residual_norm=residual,
    )


def steady_state(params: SystemParams) -> SteadyStateReport:
    """Exact RWA steady state from the Lyapunov equation."""
    dd = build_rwa_drift_diffusion(params)
    sol = solve_lyapunov(dd.A, dd.D)
    try:
        r = derive(params).r
    except UnstableRatio:
        r = None
    return mechanical_report(sol.V[:2, :2], r, covariance=sol.V, residual=sol.residual_norm)


def variance_from_beta(r: float, occupancy: float, anomalous: complex) -> tuple[float, float]:
    """2<X1^2> and 2<X2^2> recomposed from Bogoliubov-mode moments."""
    re = anomalous.real
    return (math.exp(-2 * r) * (1 + 2 * occupancy + 2 * re),
            math.exp(2 * r) * (1 + 2 * occupancy - 2 * re))


# -- closed-form results ----------------------------------------------------

@dataclass(frozen=True)
class OptimalRatio:
    ratio: float
    e_minus_2r: float
    regime_warning: bool


def optimal_ratio_analytic(coop: float, n_th: float) -> OptimalRatio:
    """Large-cooperativity optimum of G+/G- and the matching e^{-2r}.

    Below coop = 1 + 2 n_th the formula would give a negative ratio; it is
    clamped to 0 and flagged.
    """
    root = math.sqrt((1 + 2 * n_th) / coop)
    return OptimalRatio(
        ratio=max(1.0 - root, 0.0),
        e_minus_2r=0.5 * root,
        regime_warning=coop < REGIME_FACTOR * (1 + 2 * n_th),
    )


def min_variance_analytic(coop: float, n_th: float, gamma_m_over_kappa: float) -> float:
    """Optimized 2<X1^2>: heating floor plus sqrt((1+2n_th)/C)."""
    return gamma_m_over_kappa * (1 + 2 * n_th) + math.sqrt((1 + 2 * n_th) / coop)


def strong_coupling_onset(n_th: float, gamma_m_over_kappa: float) -> float:
    """Cooperativity above which optimized couplings split the output spectrum.

    With large-C optimal couplings g_eff^2 ~ (kappa Gamma_M / 2) sqrt((1+2n_th) C);
    the cavity output develops two peaks once g_eff^2 > kappa^2 / 8.
    """
    return (1.0 / 16.0) / gamma_m_over_kappa**2 / (2 * n_th + 1)


@dataclass(frozen=True)
class SelfEnergy:
    sigma: complex
    n_eff_x1: float
    n_eff_x2: float

    @property
    def x2_diverges(self) -> bool:
        return math.isinf(self.n_eff_x2)


def semiclassical_self_energy(params: SystemParams, omega: float = 0.0) -> SelfEnergy:
    """Cavity-induced self energy of the mechanical quadratures and the
    effective noise temperatures it implies, from the damping/noise ratio."""
    gp, gm = params.g_plus, params.g_minus
    g2 = (gm - gp) * (gm + gp)
    sigma = -1j * g2 / (params.kappa / 2 - 1j * omega)
    damping = -2.0 * sigma.imag
    if damping == 0.0:
        # QND point: X1 is left undamped and unheated, X2 sees unbounded noise.
        x1 = (gm - gp) / (gm + gp)
        return SelfEnergy(sigma=sigma, n_eff_x1=0.5 * (x1 - 1), n_eff_x2=math.inf)
    noise_x1 = params.kappa * abs(sigma / (gm + gp)) ** 2
    noise_x2 = params.kappa * abs(sigma / (gm - gp)) ** 2
    return SelfEnergy(
        sigma=sigma,
        n_eff_x1=0.5 * (noise_x1 / damping - 1),
        n_eff_x2=0.5 * (noise_x2 / damping - 1),
    )


@dataclass(frozen=True)
class ImpedanceMatch:
    gamma_opt: float
    heating_rate: float
    ratio: float
    regime_warning: bool


def impedance_match_check(params: SystemParams) -> ImpedanceMatch:
    """Compare the optical damping with the thermal heating rate of beta."""
    d = derive(params)
    heating = params.gamma_m * (1 + 2 * params.n_th) * math.exp(2 * d.r)
    return ImpedanceMatch(
        gamma_opt=d.gamma_opt,
        heating_rate=heating,
        ratio=d.gamma_opt / heating,
        regime_warning=d.coop < REGIME_FACTOR * (1 + 2 * params.n_th),
    )


@dataclass(frozen=True)
class BAEComparison:
    var_x1_bae: float
    purity_sq_bae: float

    @property
    def n_eff_bae(self) -> float:
        return 0.5 * (math.sqrt(self.purity_sq_bae) - 1)


def bae_comparison(coop: float, n_th: float) -> BAEComparison:
    """Squeezing and purity of single-quadrature measurement plus feedback."""
    return BAEComparison(
        var_x1_bae=math.sqrt((1 + 2 * n_th) / coop),
        purity_sq_bae=math.sqrt(1 + 2 * n_th) * math.sqrt(coop),
    )
