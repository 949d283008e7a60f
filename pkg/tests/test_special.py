import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from meixner.special import (
    Partition,
    bessel_first_zero,
    bessel_I_norm,
    bessel_I_sq,
    bessel_I_sq_deriv,
    bessel_J_norm,
    bessel_J_product,
    bessel_product_tail,
    bessel_zeros,
    beta_nu,
    beta_pochhammer,
    partitions,
    pochhammer,
)

NUS = (0.0, 0.5, 1.5)


def _reference_I(nu, x, dps=30):
    """Slow high-precision summation of the normalized series."""
    with mpmath.workdps(dps):
        q = mpmath.mpf(x) ** 2 / 4
        total, term, k = mpmath.mpf(1), mpmath.mpf(1), 0
        while abs(term) > mpmath.mpf(10) ** (-dps):
            k += 1
            term = term * q / (k * (nu + k))
            total += term
        return float(total)


@pytest.mark.parametrize("nu", NUS)
def test_series_matches_high_precision_reference(nu):
    for x in np.linspace(0, 6, 13):
        ref = _reference_I(nu, x)
        assert abs(bessel_I_norm(nu, x) - ref) <= 1e-13 * max(1.0, abs(ref))


@pytest.mark.parametrize("nu", NUS)
def test_matches_mpmath_besselj(nu):
    for x in (0.3, 1.0, 2.5, 4.0):
        ref = float(mpmath.gamma(nu + 1) * (2 / mpmath.mpf(x)) ** nu * mpmath.besselj(nu, x))
        assert abs(bessel_J_norm(nu, x) - ref) < 1e-13


def test_value_at_zero():
    for nu in NUS:
        assert bessel_I_norm(nu, 0.0) == 1.0
        assert bessel_J_norm(nu, 0.0) == 1.0


@pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
def test_half_integer_closed_forms(x):
    assert abs(bessel_I_norm(0.5, x) - math.sinh(x) / x) < 1e-12
    assert abs(bessel_J_norm(0.5, x) - math.sin(x) / x) < 1e-12


@given(st.floats(-8, 8), st.sampled_from(NUS))
def test_even_in_x(x, nu):
    assert abs(bessel_I_norm(nu, x) - bessel_I_norm(nu, -x)) <= 1e-14 * bessel_I_norm(nu, x)


def test_vectorised_and_complex():
    z = np.array([-1.0, 0.0, 2.0])
    np.testing.assert_allclose(bessel_I_sq(0.5, z), [math.sin(1), 1.0, math.sinh(math.sqrt(2)) / math.sqrt(2)])
    assert abs(bessel_I_norm(0.5, 1j) - math.sin(1.0)) < 1e-14


@pytest.mark.parametrize("nu", NUS)
def test_derivative_in_z(nu):
    for z in (-3.0, 0.0, 0.7, 4.0):
        h = 1e-5
        fd = (bessel_I_sq(nu, z + h) - bessel_I_sq(nu, z - h)) / (2 * h)
        assert abs(fd - bessel_I_sq_deriv(nu, z)) < 1e-7


def test_rejects_bad_order():
    with pytest.raises(ValueError):
        bessel_I_sq(-1.0, 1.0)


def test_first_zeros():
    assert abs(bessel_first_zero(1) - 2.40483) < 1e-4
    assert abs(bessel_first_zero(2) - math.pi) < 1e-10
    assert abs(bessel_first_zero(4) - 4.49341) < 1e-4
    for beta in (1, 2, 4):
        assert abs(bessel_J_norm(beta_nu(beta), bessel_first_zero(beta))) < 1e-10


def test_zeros_match_mpmath():
    ours = bessel_zeros(0.0, 10)
    ref = [float(mpmath.besseljzero(0, k)) for k in range(1, 11)]
    np.testing.assert_allclose(ours, ref, atol=1e-12)


@pytest.mark.parametrize("beta", [1, 2, 4])
def test_product_formula_within_tail_bound(beta):
    # fifty zeros leave a relative tail of roughly x^2 * 0.002, just above 1e-3 in absolute terms
    nu = beta_nu(beta)
    x = np.linspace(0, bessel_first_zero(beta), 200)
    exact = bessel_J_norm(nu, x)
    err = np.abs(bessel_J_product(nu, x) - exact)
    bound = np.abs(exact) * np.expm1(1.01 * x**2 * bessel_product_tail(nu)) + 1e-14
    assert np.all(err <= bound)
    assert err.max() < 1e-2
    assert np.abs(bessel_J_product(nu, x, 1000) - exact).max() < 1e-3


def test_pochhammer():
    assert pochhammer(2.7, 0) == 1.0
    assert pochhammer(1, 5) == 120
    assert pochhammer(1.5, 2) == 3.75
    assert abs(pochhammer(0.3, 7) - float(mpmath.rf(0.3, 7))) < 1e-12


def test_beta_pochhammer():
    assert beta_pochhammer(2.0, Partition((2, 1)), 2) == 6.0
    assert beta_pochhammer(1.3, Partition(()), 1) == 1.0
    assert beta_pochhammer(1.3, Partition((4,)), 4) == pochhammer(1.3, 4)


def _count_partitions(k, largest=None):
    largest = k if largest is None else largest
    if k == 0:
        return 1
    return sum(_count_partitions(k - j, j) for j in range(1, min(k, largest) + 1))


def test_partition_counts():
    assert len(partitions(0)) == 1
    assert len(partitions(4)) == 5
    assert len(partitions(10)) == 42
    for k in range(15):
        assert len(partitions(k)) == _count_partitions(k)


def test_partition_order_and_multiplicities():
    ps = partitions(4)
    assert [p.parts for p in ps] == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]
    for p in partitions(9):
        nu = p.multiplicities()
        assert sum((j + 1) * m for j, m in enumerate(nu)) == 9
        assert Partition.from_multiplicities(nu) == p


def test_partition_limits():
    with pytest.raises(ValueError):
        partitions(41)
    with pytest.raises(ValueError):
        Partition((1, 2))
