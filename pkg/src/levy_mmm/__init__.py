"""Minimal f-divergence equivalent martingale measures for exponential Lévy models."""

__version__ = "0.1.0"

from .divergence import DivergenceSpec, f_prime, f_prime_inverse, f_second, f_value
from .levy_model import FiniteAtomic, LevyTriplet, RadialDensity, Truncation, characteristic_exponent
from .montecarlo import SimulationConfig, density_terminal, estimate, simulate
from .solver import (
    ExistenceViolation,
    GirsanovParams,
    NoSolution,
    SolverConfig,
    divergence_closed_form,
    drift_residual,
    solve,
    y_candidate,
)

__all__ = [
    "DivergenceSpec", "ExistenceViolation", "FiniteAtomic", "GirsanovParams", "LevyTriplet", "NoSolution",
    "RadialDensity", "SimulationConfig", "SolverConfig", "Truncation", "characteristic_exponent",
    "density_terminal", "divergence_closed_form", "drift_residual", "estimate", "f_prime",
    "f_prime_inverse", "f_second", "f_value", "simulate", "solve", "y_candidate",
]
