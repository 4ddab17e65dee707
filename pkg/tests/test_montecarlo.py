import csv
import math

import numpy as np
import pytest

from levy_mmm import models
from levy_mmm.divergence import DivergenceSpec
from levy_mmm.levy_model import FiniteAtomic, LevyTriplet, RadialDensity, Truncation
from levy_mmm.montecarlo import (
    SimulationConfig,
    UnsupportedMeasure,
    density_terminal,
    dump_paths,
    estimate,
    mc_characteristic_check,
    mc_divergence,
    mc_martingale_check,
    poisson_count_gof,
    simulate,
)
from levy_mmm.solver import ExplicitGirsanov, GirsanovParams, solve

N = 100_000
LN2, LN32 = math.log(2.0), math.log(1.5)


def diffusion_params(beta):
    return GirsanovParams(np.array([beta]), np.array([beta]), np.zeros(1), DivergenceSpec.entropy())


def test_estimate_examples():
    assert estimate(np.ones(10)) == estimate(np.ones(10))
    e = estimate(np.ones(10))
    assert (e.mean, e.se) == (1.0, 0.0)
    e = estimate([0.0, 2.0])
    assert (e.mean, e.se) == (1.0, 1.0)
    with pytest.raises(ValueError):
        estimate([1.0])


def test_estimate_flags_nonfinite():
    e = estimate([1.0, math.inf, 3.0])
    assert e.n_nonfinite == 1 and not math.isfinite(e.mean)
    e = estimate([1.0, math.inf, 3.0], drop_nonfinite=True)
    assert (e.mean, e.n, e.n_nonfinite) == (2.0, 2, 1)


def test_config_validation():
    with pytest.raises(ValueError):
        SimulationConfig(T=0.0)
    with pytest.raises(ValueError):
        SimulationConfig(n_paths=0)


def test_brownian_terminal_mean(brownian):
    b = simulate(brownian, SimulationConfig(n_paths=N, seed=1))
    assert abs(b.X.mean()) < 4 / math.sqrt(N)
    assert estimate(b.X[:, 0] ** 2).within(1.0)


def test_poisson_counts():
    t = models.single_atom(0.0, LN2)
    b = simulate(t, SimulationConfig(n_paths=N, seed=2))
    assert abs(b.counts.mean() - 1.0) < 4 * math.sqrt(1.0 / N)
    assert poisson_count_gof(b, t)[0] > 1e-3


def test_poisson_counts_large_intensity():
    t = LevyTriplet([0.0], [[0.0]], FiniteAtomic(np.array([[0.01]]), np.array([400.0])))
    b = simulate(t, SimulationConfig(n_paths=N, seed=3))
    assert abs(b.counts.mean() - 400.0) < 4 * math.sqrt(400.0 / N)
    assert poisson_count_gof(b, t)[0] > 1e-3


def test_truncation_compensation():
    # canonical truncation: X_T = N ln2 - T ln2, so E X_T = 0 when b = 0
    t = models.single_atom(0.0, LN2)
    b = simulate(t, SimulationConfig(n_paths=10, seed=4, T=2.0))
    assert np.allclose(b.X[:, 0], LN2 * b.counts[:, 0] - 2.0 * LN2)


def test_golden_model_pathwise_spread(golden):
    # X^2 - X^1 = (ln3 - 1 - ln2) T + ln(3/2) N_T for the built-in triplet
    t, _ = golden
    T = 1.5
    b = simulate(t, SimulationConfig(n_paths=1000, seed=5, T=T))
    spread = b.X[:, 1] - b.X[:, 0]
    assert np.allclose(spread, LN32 * (b.counts[:, 0] + T) - T, atol=1e-12)
    assert np.allclose(b.gaussian[:, 0], b.gaussian[:, 1])


def test_literal_process_drift_gives_unit_multiplier():
    # b = (0, -1) is the drift of (W + ln2 P, W + ln3 P - t); its martingale conditions force Y(a) = 1,
    # unlike the worked equations, which is why the built-in model uses b = (ln2, ln3 - 1)
    t = LevyTriplet([0.0, -1.0], np.ones((2, 2)),
                    FiniteAtomic(np.array([[LN2, math.log(3.0)]]), np.array([1.0])), Truncation.ZERO)
    sol = solve(t, models.two_asset_divergence())
    assert sol.params.jump_multiplier(t.nu.locations)[0] == pytest.approx(1.0, abs=1e-9)


def test_reproducible_and_chunk_independent(golden):
    t, _ = golden
    a = simulate(t, SimulationConfig(n_paths=2000, seed=11))
    b = simulate(t, SimulationConfig(n_paths=2000, seed=11))
    c = simulate(t, SimulationConfig(n_paths=500, seed=11))
    for name in ("gaussian", "counts", "X"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
        assert np.array_equal(getattr(a, name)[:500], getattr(c, name))
    assert not np.array_equal(a.X, simulate(t, SimulationConfig(n_paths=2000, seed=12)).X)


def test_density_measure_rejected():
    t = LevyTriplet([0.0], [[0.0]], RadialDensity(lambda y: np.exp(-np.abs(y[:, 0]))))
    with pytest.raises(UnsupportedMeasure, match="atoms"):
        simulate(t, SimulationConfig(n_paths=10))


def test_identity_density_is_one(golden):
    t, spec = golden
    b = simulate(t, SimulationConfig(n_paths=100, seed=1))
    assert np.array_equal(density_terminal(b, t, GirsanovParams.identity(spec, 2)), np.ones(100))


def test_pure_diffusion_density_moments(brownian):
    b = simulate(brownian, SimulationConfig(n_paths=N, seed=21))
    p = diffusion_params(-0.5)
    z = density_terminal(b, brownian, p)
    assert estimate(z).within(1.0)
    # E Z ln Z = beta^2 T / 2, E Z^2 = exp(beta^2 T)
    assert mc_divergence(b, brownian, DivergenceSpec.entropy(), p, z).within(0.125)
    assert mc_divergence(b, brownian, DivergenceSpec.quadratic(), p, z).within(math.exp(0.25))
    assert all(a.passed for a in mc_martingale_check(b, brownian, p, z))


def test_martingale_check_negative_control(brownian):
    b = simulate(brownian, SimulationConfig(n_paths=N, seed=22))
    (res,) = mc_martingale_check(b, brownian, diffusion_params(0.0))
    assert not res.passed
    assert res.estimate.mean == pytest.approx(math.exp(0.5), rel=0.02)


def test_nonpositive_multiplier_rejected(two_atom):
    b = simulate(two_atom, SimulationConfig(n_paths=10))
    bad = ExplicitGirsanov([0.0], two_atom.nu.locations, [1.0, -0.5])
    with pytest.raises(ValueError, match="positive"):
        density_terminal(b, two_atom, bad)


@pytest.mark.parametrize("model", ["golden", "two_atom"])
def test_characteristic_function(model, request):
    t = request.getfixturevalue(model)
    t = t[0] if isinstance(t, tuple) else t
    b = simulate(t, SimulationConfig(n_paths=N, seed=31))
    for scale in (1.0, 0.5):
        for i in range(t.dim):
            u = np.zeros(t.dim)
            u[i] = scale
            assert mc_characteristic_check(b, t, u)["passed"]


def test_jump_times(two_atom):
    b = simulate(two_atom, SimulationConfig(n_paths=50, seed=41, T=2.0))
    for i in range(50):
        times = b.jump_times(i)
        assert len(times) == b.counts[i].sum()
        assert all(0 < s < 2.0 for s, _ in times)
        assert [s for s, _ in times] == sorted(s for s, _ in times)
        assert [sum(1 for _, j in times if j == k) for k in range(2)] == b.counts[i].tolist()
        assert times == b.jump_times(i)


def test_path_dump(tmp_path, two_atom):
    b = simulate(two_atom, SimulationConfig(n_paths=5, seed=1))
    out = tmp_path / "paths.csv"
    dump_paths(b, np.ones(5), out)
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["path", "G0", "N0", "N1", "X0", "Z"]
    assert len(rows) == 6
    assert float(rows[3][4]) == b.X[2, 0]
