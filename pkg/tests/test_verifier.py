import math

import numpy as np
import pytest

from levy_mmm import models
from levy_mmm.divergence import DivergenceSpec
from levy_mmm.solver import ExplicitGirsanov, GirsanovParams, SolverConfig, solve
from levy_mmm.verifier import (
    DegenerateSupport,
    SupportClass,
    check_record,
    classify_support,
    constraint_alternatives,
    fundamental_residual,
    minimality_certificate,
    scale_invariance_check,
    time_invariance_check,
)

from conftest import POWER_SPECS

LN2, LN3 = math.log(2.0), math.log(3.0)
GRID = (0.5, 1.0, 2.0, 5.0)


def test_fundamental_trivial(golden):
    t, spec = golden
    rep = fundamental_residual(spec, GirsanovParams.identity(spec, 2), GRID, t.nu, t.c)
    assert rep.max_residual_equ == 0.0 and rep.rank1_defect == 0.0 and rep.passed


def test_fundamental_golden(golden):
    t, spec = golden
    rep = fundamental_residual(spec, solve(t, spec).params, GRID, t.nu, t.c)
    assert rep.max_residual_equ < 1e-10 and rep.passed
    assert rep.grid == GRID


def test_fundamental_fails_with_kernel_part_removed(golden):
    t, spec = golden
    sol = solve(t, spec, SolverConfig(fix_kernel_zero=True))
    assert not fundamental_residual(spec, sol.params, GRID, t.nu, t.c).passed


@pytest.mark.parametrize("theta", [-0.4, 0.3, 1.2])
def test_fundamental_entropy_identity(theta):
    # ln Y = theta (e^y - 1) = x f''(x) beta (e^y - 1) with x f''(x) = 1
    t = models.two_atom(c=1.0)
    p = GirsanovParams.coupled(DivergenceSpec.entropy(), [theta], [0.0])
    rep = fundamental_residual(DivergenceSpec.entropy(), p, GRID, t.nu, t.c)
    assert rep.max_residual_equ < 1e-10
    assert rep.rank1_defect < 1e-10


def test_fundamental_not_applicable_without_gaussian_part(two_atom):
    spec = DivergenceSpec.quadratic()
    rep = fundamental_residual(spec, solve(two_atom, spec).params, GRID, two_atom.nu, two_atom.c)
    assert not rep.applicable and rep.max_residual_equ is None


def test_fundamental_rank1_defect_detects_mixing():
    # a non-separable lhs: the multi-term divergence with V = 0 and c full rank
    t = models.two_atom(c=1.0)
    spec = DivergenceSpec(((0.5, 0.0), (1.0, -1.0)), linear=-1.0)
    p = GirsanovParams.coupled(spec, [0.8], [0.0])
    rep = fundamental_residual(spec, p, GRID, t.nu, t.c)
    assert rep.rank1_defect > 1e-6 and not rep.passed


def test_fundamental_grid_domain(golden):
    t, spec = golden
    with pytest.raises(ValueError):
        fundamental_residual(spec, GirsanovParams.identity(spec, 2), (0.0, 1.0), t.nu, t.c)


def test_support_classes(golden, brownian):
    t, spec = golden
    rep = classify_support(t, solve(t, spec).params)
    # c = ones, so beta'c beta = (beta1 + beta2)^2 with beta1 + beta2 = ln(3/4) - 3/2
    assert rep.kind is SupportClass.WholePositiveLine
    assert rep.quadratic_form == pytest.approx((math.log(0.75) - 1.5) ** 2, rel=1e-10)
    assert classify_support(brownian, solve(brownian, DivergenceSpec.entropy()).params).kind \
        is SupportClass.WholePositiveLine
    up = models.single_atom(LN2 - math.e, LN2)
    assert classify_support(up, solve(up, DivergenceSpec.entropy()).params).kind is SupportClass.RayUpward
    down = models.single_atom(LN2 - 0.5, LN2)
    assert classify_support(down, solve(down, DivergenceSpec.entropy()).params).kind is SupportClass.RayDownward


def test_support_mixed_signs(two_atom):
    alt = ExplicitGirsanov([0.0], two_atom.nu.locations, [2.0, 0.5])
    assert classify_support(two_atom, alt).kind is SupportClass.WholePositiveLine


def test_support_degenerate(two_atom):
    with pytest.raises(DegenerateSupport):
        classify_support(two_atom, ExplicitGirsanov([0.0], two_atom.nu.locations, [1.0, 1.0]))


@pytest.mark.parametrize("scale", [0.01, 7.0])
def test_support_ignores_mass_scale(scale):
    t = models.two_atom(masses=(scale, scale))
    alt = ExplicitGirsanov([0.0], t.nu.locations, [1.5, 1.2])
    assert classify_support(t, alt).kind is SupportClass.RayUpward


def test_constraint_alternatives_stay_martingale(two_atom):
    from levy_mmm.solver import drift_residual

    sol = solve(two_atom, DivergenceSpec.entropy())
    alts = constraint_alternatives(two_atom, sol.params)
    assert len(alts) == 8
    for a in alts:
        assert np.max(np.abs(drift_residual(two_atom, a))) < 1e-12
        assert np.all(a.y_values > 0)
    # the golden model has no free direction
    t, spec = models.two_asset_triplet(), models.two_asset_divergence()
    assert constraint_alternatives(t, solve(t, spec).params) == []


def test_minimality_self_and_rejection(two_atom):
    spec = DivergenceSpec.entropy()
    sol = solve(two_atom, spec)
    same = ExplicitGirsanov(sol.beta, two_atom.nu.locations, sol.params.jump_multiplier(two_atom.nu.locations))
    # the drift residual here is 0.5 * 1 = 0.5
    off = ExplicitGirsanov([0.0], two_atom.nu.locations, sol.params.jump_multiplier(two_atom.nu.locations) + [0.5, 0.0])
    rep = minimality_certificate(two_atom, spec, sol.params, [same, off], n_paths=20_000, seed=1)
    assert rep.alternatives[0].difference == 0.0 and rep.alternatives[0].passed
    assert not rep.alternatives[1].accepted
    assert rep.alternatives[1].drift_residual == pytest.approx(0.5)
    assert rep.rejected == [rep.alternatives[1]]
    assert rep.passed


def test_minimality_detects_a_better_measure(two_atom):
    # Using a non-minimal measure as the reference, the true minimiser beats it clearly.
    spec = DivergenceSpec.quadratic()
    sol = solve(two_atom, spec)
    alts = constraint_alternatives(two_atom, sol.params, steps=(0.3,))
    ref = alts[0]
    truth = ExplicitGirsanov(sol.beta, two_atom.nu.locations, sol.params.jump_multiplier(two_atom.nu.locations))
    z_ref_is_minimal = minimality_certificate(two_atom, spec, ref, [truth], n_paths=200_000, seed=2)
    assert not z_ref_is_minimal.passed


def test_scale_invariance():
    rep = scale_invariance_check(DivergenceSpec.entropy(), [1.0, math.e])
    assert rep.passed
    assert rep.results[0].coefficients == (1.0, 0.0, 0.0) and rep.results[0].max_rel_error == 0.0
    assert rep.results[1].coefficients == pytest.approx((math.e, math.e, 0.0))
    assert scale_invariance_check(DivergenceSpec.quadratic(), [2.0]).results[0].coefficients == (4.0, 0.0, 0.0)
    multi = scale_invariance_check(models.two_asset_divergence())
    assert not multi.applicable and not multi.passed


def test_time_invariance(brownian):
    rep = time_invariance_check(brownian, DivergenceSpec.entropy(), (1.0, 2.0, 5.0))
    assert rep.passed and rep.param_deviation == 0.0
    assert rep.values[1] == pytest.approx(2 * rep.values[0], rel=1e-12)
    q = time_invariance_check(brownian, DivergenceSpec.quadratic(), (1.0, 2.0))
    # ln E[Z^2] doubles with T
    assert math.log(q.values[1]) == pytest.approx(2 * math.log(q.values[0]), rel=1e-12)


def test_check_records_serialise(golden):
    import json

    t, spec = golden
    sol = solve(t, spec)
    for name, rep in [("fundamental", fundamental_residual(spec, sol.params, GRID, t.nu, t.c)),
                      ("support", classify_support(t, sol.params)),
                      ("scale", scale_invariance_check(DivergenceSpec.entropy())),
                      ("time", time_invariance_check(t, spec, (1.0, 2.0)))]:
        rec = check_record(name, rep)
        assert rec["name"] == name and isinstance(rec["passed"], bool)
        json.dumps(rec)
