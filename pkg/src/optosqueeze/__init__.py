"""Steady-state mechanical squeezing from two-tone driven optomechanics."""

from .errors import (
    InvalidInput,
    NoInteriorMinimum,
    NonFinite,
    NotConverged,
    NotHurwitz,
    NumericalFailure,
    QuadratureNotConverged,
    SingularResponse,
    SingularSystem,
    SqueezeError,
    UnstableRatio,
    UnstableReduced,
)
from .model import (
    INFINITE,
    DerivedQuantities,
    SystemParams,
    check_bad_cavity_condition,
    derive,
    params_from_cooperativity,
)
from .rwa import steady_state, optimal_ratio_analytic, min_variance_analytic
from .lindblad import lindblad_steady_state
from .floquet import periodic_steady_state
from .optimize import optimize_ratio, ratio_objective, sweep

__version__ = "0.1.0"
