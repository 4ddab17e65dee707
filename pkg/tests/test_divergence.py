import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from levy_mmm.divergence import (
    DivergenceSpec,
    DomainError,
    ExtendedShapeParams,
    RangeError,
    a_coeff,
    affine_scale_decomposition,
    convexity_scan,
    extended_second_derivative,
    f_prime,
    f_prime_inverse,
    f_second,
    f_value,
    is_power_family,
)

gammas = st.sampled_from([-4.0, -3.0, -2.5, -2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0])
xs = st.floats(1e-3, 1e3)


def spec_strategy():
    term = st.tuples(st.floats(0.1, 3.0), gammas)
    return st.builds(
        lambda terms, b, c: DivergenceSpec(tuple({g: (w, g) for w, g in terms}.values()), b, c),
        st.lists(term, min_size=1, max_size=3), st.floats(-2, 2), st.floats(-2, 2),
    )


def test_named_members():
    x = np.array([0.5, 1.0, 2.0])
    assert np.allclose(f_value(DivergenceSpec.entropy(), x), x * np.log(x))
    assert np.allclose(f_value(DivergenceSpec.reverse_entropy(), x), -np.log(x))
    assert np.allclose(f_value(DivergenceSpec.quadratic(), x), x**2)
    # gamma = -3: c = sign(-2 / -1) = +1, f = x^{-1}
    assert np.allclose(f_value(DivergenceSpec.power(-3.0), x), 1 / x)
    # gamma = -1.5: c = sign(-0.5 / 0.5) = -1, f = -sqrt(x)
    assert np.allclose(f_value(DivergenceSpec.power(-1.5), x), -np.sqrt(x))
    assert DivergenceSpec.from_name("power(-3)") == DivergenceSpec.power(-3.0)
    with pytest.raises(ValueError):
        DivergenceSpec.from_name("hellinger")


def test_a_coefficient():
    assert a_coeff(0.0) == 2.0 and a_coeff(-3.0) == 2.0 and a_coeff(-1.5) == 0.25
    assert a_coeff(-1.0) == 1.0 and a_coeff(-2.0) == 1.0


def test_invalid_specs():
    with pytest.raises(ValueError):
        DivergenceSpec(((0.0, 1.0),))
    with pytest.raises(ValueError):
        DivergenceSpec(((1.0, 1.0), (2.0, 1.0)))
    with pytest.raises(ValueError):
        DivergenceSpec(())


def test_domain_error():
    with pytest.raises(DomainError):
        f_value(DivergenceSpec.entropy(), 0.0)
    with pytest.raises(DomainError):
        f_prime(DivergenceSpec.entropy(), np.array([1.0, -1.0]))


def test_scalar_in_scalar_out():
    assert isinstance(f_value(DivergenceSpec.entropy(), 2.0), float)
    assert isinstance(f_prime_inverse(DivergenceSpec.entropy(), 1.0), float)


def test_prime_range_and_range_error():
    assert DivergenceSpec.entropy().prime_range() == (-math.inf, math.inf)
    assert DivergenceSpec.quadratic().prime_range() == (0.0, math.inf)
    assert DivergenceSpec.power(-3.0).prime_range() == (-math.inf, 0.0)
    assert DivergenceSpec.single(-1.5, linear=2.0).prime_range() == (-math.inf, 2.0)
    with pytest.raises(RangeError) as exc:
        f_prime_inverse(DivergenceSpec.quadratic(), -1.0)
    assert exc.value.interval == (0.0, math.inf)


@given(spec_strategy(), xs)
def test_derivatives_match_finite_differences(spec, x):
    h = 1e-6 * x
    fd1 = (f_value(spec, x + h) - f_value(spec, x - h)) / (2 * h)
    fd2 = (f_prime(spec, x + h) - f_prime(spec, x - h)) / (2 * h)
    scale1 = max(1.0, abs(f_value(spec, x)) / x)
    assert fd1 == pytest.approx(f_prime(spec, x), rel=1e-5, abs=1e-5 * scale1)
    assert fd2 == pytest.approx(f_second(spec, x), rel=1e-5, abs=1e-5 * max(1.0, abs(f_prime(spec, x)) / x))


@given(spec_strategy(), st.floats(1e-4, 1e4))
def test_inverse_round_trip(spec, x):
    u = f_prime(spec, x)
    assert f_prime(spec, f_prime_inverse(spec, u)) == pytest.approx(u, rel=1e-9, abs=1e-9)


@given(spec_strategy(), xs)
def test_strict_convexity(spec, x):
    assert f_second(spec, x) > 0


def test_multi_term_inverse_value():
    # f'(x) = x + ln x for x^2/2 + x ln x - x; f'(1) = 1
    spec = DivergenceSpec(((0.5, 0.0), (1.0, -1.0)), linear=-1.0)
    assert f_prime_inverse(spec, 1.0) == pytest.approx(1.0, abs=1e-13)
    x = f_prime_inverse(spec, 3.0)
    assert x + math.log(x) == pytest.approx(3.0, abs=1e-12)


@given(gammas, st.floats(0.05, 20.0), st.floats(0.1, 3), st.floats(-2, 2), st.floats(-2, 2))
def test_affine_scale_identity(g, u, w, b, c):
    spec = DivergenceSpec.single(g, w, b, c)
    A, B, C = affine_scale_decomposition(spec, u)
    assert A > 0
    x = np.logspace(-2, 2, 25)
    lhs = f_value(spec, u * x)
    assert np.allclose(lhs, A * f_value(spec, x) + B * x + C, rtol=1e-10, atol=1e-10)


def test_scale_decomposition_examples():
    assert affine_scale_decomposition(DivergenceSpec.entropy(), 1.0) == (1.0, 0.0, 0.0)
    A, B, C = affine_scale_decomposition(DivergenceSpec.entropy(), math.e)
    assert (A, B, C) == pytest.approx((math.e, math.e, 0.0))
    assert affine_scale_decomposition(DivergenceSpec.quadratic(), 2.0) == (4.0, 0.0, 0.0)
    assert affine_scale_decomposition(DivergenceSpec(((1, 0.0), (1, -1.0))), 2.0) is None
    with pytest.raises(DomainError):
        affine_scale_decomposition(DivergenceSpec.entropy(), 0.0)


def test_power_family_detection():
    assert is_power_family(DivergenceSpec.single(-3.0, 2.0)) == (4.0, -3.0)
    assert is_power_family(DivergenceSpec(((1, 0.0), (1, -1.0)))) is None


def test_extended_shape():
    p = ExtendedShapeParams(gamma=0.0, a=1.0, b=(0.1,), btilde=(0.2,))
    x = np.array([0.5, 2.0])
    assert np.allclose(extended_second_derivative(p, x), 1 + 0.1 * np.log(x) + 0.2 / x)
    assert convexity_scan(p, np.logspace(-2, 2, 50))
    bad = ExtendedShapeParams(gamma=0.0, a=1.0, b=(-5.0,), btilde=(0.0,))
    assert not convexity_scan(bad, np.logspace(-2, 2, 50))
    with pytest.raises(ValueError):
        ExtendedShapeParams(gamma=0.0, a=-1.0)
