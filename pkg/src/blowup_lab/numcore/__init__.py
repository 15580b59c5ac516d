"""Shared numerical kernels: root finding, RK5(4) integration, band solves, fits."""
from .banded import BandedMatrix, SingularBandedError, solve_banded
from .fitting import PowerLogFit, fit_power_log
from .ivp import IvpControls, IvpError, IvpResult, integrate_at, integrate_ivp
from .roots import Bracket, BracketError, RootResult, bisect_root, find_root

__all__ = [
    "BandedMatrix",
    "SingularBandedError",
    "solve_banded",
    "PowerLogFit",
    "fit_power_log",
    "IvpControls",
    "IvpError",
    "IvpResult",
    "integrate_at",
    "integrate_ivp",
    "Bracket",
    "BracketError",
    "RootResult",
    "bisect_root",
    "find_root",
]
