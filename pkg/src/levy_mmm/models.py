"""Built-in models with known answers."""
from __future__ import annotations

import math

import numpy as np

from .divergence import DivergenceSpec
from .levy_model import FiniteAtomic, LevyTriplet, Truncation

LN2, LN3, LN32 = math.log(2.0), math.log(3.0), math.log(1.5)


def two_asset_triplet() -> LevyTriplet:
    """Two assets driven by one Brownian motion and one Poisson process.

    Both coordinates share the Brownian part (``c`` is the all-ones matrix);
    the single jump moves them by ``(ln 2, ln 3)`` at unit intensity.
    """
    return LevyTriplet(
        b=np.array([LN2, LN3 - 1.0]),
        c=np.ones((2, 2)),
        nu=FiniteAtomic(np.array([[LN2, LN3]]), np.array([1.0])),
        trunc=Truncation.ZERO,
    )


def two_asset_divergence() -> DivergenceSpec:
    """``f(x) = x^2 / 2 + x ln x - x``."""
    return DivergenceSpec(((0.5, 0.0), (1.0, -1.0)), linear=-1.0)


def two_asset_closed_form() -> dict:
    y_a = 1.0 - LN32
    return {
        "beta1": 3 * LN3 - 5 * LN2 - 3,
        "beta2": 1.5 + 3 * LN2 - 2 * LN3,
        "Y_a": y_a,
        "v1": -math.log(y_a) - LN32,
        "beta1_plus_2beta2": -LN32,
    }


def pure_diffusion(b: float = 0.0, c: float = 1.0) -> LevyTriplet:
    return LevyTriplet(np.array([b]), np.array([[c]]))


def single_atom(b: float, y: float, mass: float = 1.0, trunc=Truncation.CANONICAL) -> LevyTriplet:
    return LevyTriplet(np.array([b]), np.zeros((1, 1)), FiniteAtomic(np.array([[y]]), np.array([mass])), trunc)


def two_atom(b: float = -1.0, y=(LN2, LN3), masses=(1.0, 1.0), c: float = 0.0) -> LevyTriplet:
    """One asset with jumps of two sizes: an incomplete market with a one-parameter family of measures."""
    return LevyTriplet(
        np.array([b]), np.array([[c]]),
        FiniteAtomic(np.array(y, dtype=float).reshape(-1, 1), np.array(masses, dtype=float)),
    )


def jump_diffusion() -> LevyTriplet:
    """Small-volatility diffusion with one down-jump and one up-jump size."""
    return LevyTriplet(
        np.array([0.05]), np.array([[0.04]]),
        FiniteAtomic(np.array([[-0.1], [0.08]]), np.array([0.5, 0.3])),
    )


def power_specs() -> dict:
    """The four standard power-family divergences, keyed by name."""
    return {
        "entropy": DivergenceSpec.entropy(),
        "reverse_entropy": DivergenceSpec.reverse_entropy(),
        "quadratic": DivergenceSpec.quadratic(),
        "power(-3)": DivergenceSpec.power(-3.0),
    }


def catalogue() -> list:
    """``(label, triplet, spec)`` for every built-in model paired with each power divergence.

    The worked two-asset example and the upward single-atom case come first with their own
    divergences.
    """
    out = [("golden", two_asset_triplet(), two_asset_divergence()),
           ("single_atom_up/entropy", single_atom(LN2 - math.e, LN2), DivergenceSpec.entropy())]
    for label, t in [("pure_diffusion", pure_diffusion()), ("two_atom", two_atom()),
                     ("jump_diffusion", jump_diffusion()), ("golden_triplet", two_asset_triplet())]:
        for name, spec in power_specs().items():
            out.append((f"{label}/{name}", t, spec))
    return out
