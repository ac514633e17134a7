"""Effective Lindblad description with the cavity adiabatically eliminated.

The reduced master equation

    d rho/dt = gamma_down D[b] + gamma_up D[b^+]
               + gamma_s (D_S[b] + D_S[b^+])

is Gaussian, so its second moments close exactly:

    d<b^+b>/dt = -(gamma_down - gamma_up) <b^+b> + gamma_up
    d<bb>/dt   = -(gamma_down - gamma_up) <bb>   - gamma_s

(D_S[b] leaves both moments untouched; D_S[b^+] feeds <bb>.)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnstableRatio, UnstableReduced
from .model import SystemParams, derive
from .rwa import SteadyStateReport, mechanical_report


@dataclass(frozen=True)
class LindbladRates:
    gamma_down: float
    gamma_up: float
    gamma_s: float


def lindblad_rates(params: SystemParams) -> LindbladRates:
    # Gamma_opt cosh^2 r = 4 G-^2/kappa etc.; this form stays finite at G+ = G-.
    k, gm, nth = params.kappa, params.gamma_m, params.n_th
    return LindbladRates(
        gamma_down=gm * (nth + 1) + 4 * params.g_minus**2 / k,
        gamma_up=gm * nth + 4 * params.g_plus**2 / k,
        gamma_s=4 * params.g_plus * params.g_minus / k,
    )


def rates_from_optical_damping(gamma_m: float, n_th: float, gamma_opt: float, r: float) -> LindbladRates:
    ch, sh = math.cosh(r), math.sinh(r)
    return LindbladRates(
        gamma_down=gamma_m * (n_th + 1) + gamma_opt * ch * ch,
        gamma_up=gamma_m * n_th + gamma_opt * sh * sh,
        gamma_s=gamma_opt * ch * sh,
    )


def moment_system(rates: LindbladRates) -> tuple[np.ndarray, np.ndarray]:
    """(M, c) with d/dt (n, Re m, Im m) = M @ y + c."""
    net = rates.gamma_down - rates.gamma_up
    M = -net * np.eye(3)
    c = np.array([rates.gamma_up, -rates.gamma_s, 0.0])
    return M, c


def lindblad_steady_state(params: SystemParams) -> SteadyStateReport:
    """Mechanical steady state of the reduced master equation.

    The report carries no cavity block (``covariance`` is None).
    """
    try:
        r = derive(params).r
    except UnstableRatio:
        r = None
    return steady_state_from_rates(lindblad_rates(params), r)


def steady_state_from_rates(rates: LindbladRates, r: float | None = None) -> SteadyStateReport:
    if not rates.gamma_down > rates.gamma_up:
        raise UnstableReduced(
            f"gamma_down={rates.gamma_down:.6g} <= gamma_up={rates.gamma_up:.6g}"
        )
    M, c = moment_system(rates)
    n, re_m, im_m = np.linalg.solve(M, -c)
    v_mech = np.array([
        [0.5 + n + re_m, im_m],
        [im_m, 0.5 + n - re_m],
    ])
    return mechanical_report(v_mech, r)


def lindblad_purity_prediction(coop: float, n_th: float) -> float:
    """Large-C estimate of (1 + 2 n_eff)^2 from the reduced description."""
    return 2.0 + 2.0 * n_th / math.sqrt(2.0 * n_th + 1.0) / math.sqrt(coop)
