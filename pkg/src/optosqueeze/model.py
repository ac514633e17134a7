"""System parameters, derived rates and the bad-cavity validity check.

All rates share one (arbitrary) unit; the CLI uses kappa = 1.  Reported
squeezing is ``2 <X1^2>`` so that the vacuum sits at 1 and the 3 dB limit at
0.5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import InvalidInput, UnstableRatio

INFINITE = math.inf
"""Sentinel mechanical frequency selecting the rotating-wave approximation."""

THREE_DB = 0.5


@dataclass(frozen=True)
class SystemParams:
    kappa: float
    gamma_m: float
    n_th: float
    g_plus: float
    g_minus: float
    omega_m: float = INFINITE
    g_three: float = 0.0

    def __post_init__(self):
        if not (self.kappa > 0 and self.gamma_m > 0):
            raise InvalidInput(f"kappa and gamma_m must be positive, got {self.kappa}, {self.gamma_m}")
        if not self.n_th >= 0:
            raise InvalidInput(f"n_th must be >= 0, got {self.n_th}")
        if not self.g_minus > 0:
            raise InvalidInput(f"g_minus must be positive, got {self.g_minus}")
        if not (self.g_plus >= 0 and self.g_three >= 0):
            raise InvalidInput("g_plus and g_three must be >= 0")
        if not self.omega_m > 0:
            raise InvalidInput(f"omega_m must be positive (or INFINITE), got {self.omega_m}")

    @property
    def ratio(self) -> float:
        return self.g_plus / self.g_minus

    @property
    def coop(self) -> float:
        return 4.0 * self.g_minus**2 / (self.kappa * self.gamma_m)

    @property
    def rwa(self) -> bool:
        return math.isinf(self.omega_m)

    @property
    def rwa_stable(self) -> bool:
        """False at or beyond the QND/BAE boundary g_plus = g_minus (flag only)."""
        return self.g_plus < self.g_minus

    def with_ratio(self, ratio: float, third_tone: bool | None = None) -> "SystemParams":
        """Copy with g_plus = ratio * g_minus; g_three tracks g_plus if it did before."""
        if third_tone is None:
            third_tone = self.g_three > 0 and self.g_three == self.g_plus
        g_plus = ratio * self.g_minus
        return replace(self, g_plus=g_plus, g_three=g_plus if third_tone else self.g_three)


@dataclass(frozen=True)
class DerivedQuantities:
    r: float
    g_eff: float
    coop: float
    gamma_opt: float

    @property
    def exp_minus_2r(self) -> float:
        return math.exp(-2.0 * self.r)


def derive(params: SystemParams) -> DerivedQuantities:
    """Squeeze parameter, Bogoliubov coupling, cooperativity and optical damping."""
    gp, gm = params.g_plus, params.g_minus
    if gp >= gm:
        raise UnstableRatio(f"g_plus={gp} >= g_minus={gm}: tanh r = {gp / gm} has no finite r")
    g_eff2 = (gm - gp) * (gm + gp)
    return DerivedQuantities(
        r=math.atanh(gp / gm),
        g_eff=math.sqrt(g_eff2),
        coop=params.coop,
        gamma_opt=4.0 * g_eff2 / params.kappa,
    )


def params_from_cooperativity(
    coop: float,
    ratio: float,
    kappa: float = 1.0,
    gamma_m: float = 1e-4,
    n_th: float = 0.0,
    omega_m: float = INFINITE,
    third_tone: bool = False,
) -> SystemParams:
    """Build parameters from (cooperativity, G+/G-).

    With ``third_tone`` the auxiliary drive is locked to ``g_three = g_plus``,
    the amplitude that cancels the 2*Omega radiation-pressure oscillation.
    """
    if not (coop > 0 and kappa > 0 and gamma_m > 0):
        raise InvalidInput(f"coop, kappa, gamma_m must be positive, got {coop}, {kappa}, {gamma_m}")
    if not ratio >= 0:
        raise InvalidInput(f"ratio must be >= 0, got {ratio}")
    g_minus = math.sqrt(coop * kappa * gamma_m / 4.0)
    g_plus = ratio * g_minus
    return SystemParams(
        kappa=kappa,
        gamma_m=gamma_m,
        n_th=n_th,
        g_plus=g_plus,
        g_minus=g_minus,
        omega_m=omega_m,
        g_three=g_plus if third_tone else 0.0,
    )


@dataclass(frozen=True)
class ValidityCheck:
    lhs: float
    rhs: float
    satisfied: bool


def check_bad_cavity_condition(params: SystemParams, margin: float = 10.0) -> ValidityCheck:
    """Counter-rotating corrections stay negligible when C^(3/2) << rhs.

    ``<<`` is taken as a factor ``margin`` (default 10); lhs and rhs are
    returned so callers can apply a different margin.
    """
    if params.rwa:
        raise InvalidInput("bad-cavity check needs a finite omega_m")
    lhs = params.coop**1.5
    rhs = math.sqrt(1.0 + 2.0 * params.n_th) * (params.kappa / params.gamma_m) * (params.omega_m / params.kappa) ** 2
    return ValidityCheck(lhs=lhs, rhs=rhs, satisfied=lhs < rhs / margin)
