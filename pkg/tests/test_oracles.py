"""Closed forms against the Monte Carlo oracle on every acceptance model."""
import numpy as np
import pytest

from levy_mmm import models
from levy_mmm.divergence import DivergenceSpec
from levy_mmm.montecarlo import SimulationConfig, density_terminal, estimate, mc_divergence, simulate
from levy_mmm.solver import GirsanovParams, solve

from conftest import acceptance_cases

SEED = 20240601
CASES = acceptance_cases()


@pytest.mark.parametrize("label,t,spec", CASES, ids=[c[0] for c in CASES])
def test_closed_form_divergence_matches_monte_carlo(label, t, spec):
    sol = solve(t, spec)
    batch = simulate(t, SimulationConfig(n_paths=200_000, seed=SEED))
    est = mc_divergence(batch, t, spec, sol.params)
    assert est.n_nonfinite == 0
    assert est.within(sol.divergence_value, 4.0), (est, sol.divergence_value)


@pytest.mark.parametrize("k", range(6))
def test_density_has_unit_mean_for_arbitrary_parameters(k):
    # any (beta, theta) with Y > 0 defines a probability density, martingale measure or not
    rs = np.random.default_rng(k)
    t = models.two_asset_triplet()
    spec = DivergenceSpec.entropy()
    p = GirsanovParams(rs.uniform(-0.5, 0.5, 2), rs.uniform(-0.5, 0.5, 2), np.zeros(2), spec)
    batch = simulate(t, SimulationConfig(n_paths=100_000, seed=SEED + k))
    assert estimate(density_terminal(batch, t, p)).within(1.0, 4.0)
