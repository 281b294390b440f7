"""Diversity-multiplexing and decoding-complexity exponents for the multiple access channel."""

__version__ = "0.1.0"

from .curves import MacConfig, PiecewiseLinearCurve, mac_dmt, mac_dmt_curve, mimo_dmt
from .errors import DomainError, ResourceError, SingularityError, UnsupportedConfigurationError
from .exponent_solver import ExponentBound, solve_cbar_mac, solve_cbar_mac_d
from .jv_selection import select_users
from .mac_sim import MonteCarloReport, SimConfig, estimate_exponents, run_trials
from .selection_bounds import (
    SelectionBoundConfig,
    cbar_red_us,
    cbar_red_us_min,
    cbar_us,
    d_kl,
    dbar_us,
    optimize_L,
)

__all__ = [
    "DomainError", "ExponentBound", "MacConfig", "MonteCarloReport", "PiecewiseLinearCurve",
    "ResourceError", "SelectionBoundConfig", "SimConfig", "SingularityError",
    "UnsupportedConfigurationError", "cbar_red_us", "cbar_red_us_min", "cbar_us", "d_kl",
    "dbar_us", "estimate_exponents", "mac_dmt", "mac_dmt_curve", "mimo_dmt", "optimize_L",
    "run_trials", "select_users", "solve_cbar_mac", "solve_cbar_mac_d",
]
