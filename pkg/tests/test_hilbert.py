from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tentop.core.functions import BoundaryPower, Constant, LogTest, RationalKernel, monomial, polynomial
from tentop.core.quadrature import QuadratureConfig
from tentop.core.series import DomainError, PowerSeries
from tentop.hilbert import (
    HankelMoments,
    IllDefinedError,
    IntegralImage,
    OrderError,
    hilbert_apply,
    hilbert_via_composition,
    hmu_apply,
    imu_apply,
    partial_sum_bound_check,
    phi_kernel,
    phi_kernel_at_one,
)
from tentop.measures import lebesgue, parse_measure
from tentop.tent import TentParams


def e(k, n=None):
    c = np.zeros((n or k) + 1)
    c[k] = 1.0
    return PowerSeries.polynomial(c)


def test_hilbert_matrix_first_column():
    b = hilbert_apply(PowerSeries.polynomial([1.0]), 20).coeffs
    np.testing.assert_allclose(b, 1.0 / (np.arange(21) + 1.0), rtol=0, atol=1e-16)


@pytest.mark.parametrize("k", [0, 3, 17])
def test_hilbert_matrix_columns(k):
    b = hilbert_apply(e(k), 30).coeffs
    np.testing.assert_allclose(b, 1.0 / (np.arange(31) + k + 1.0), rtol=0, atol=1e-16)


def test_undefined_input_is_flagged():
    k = np.arange(2**15)
    cert = hilbert_apply(PowerSeries(1.0 / np.log(k + 2.0)), 4).meta["definedness"]
    assert cert["trend"] == "growing"
    sums = cert["partial_sums"]
    assert all(b > a for a, b in zip(sums, sums[1:]))
    ok = hilbert_apply(PowerSeries(1.0 / (k + 1.0) ** 2), 4).meta["definedness"]
    assert ok["trend"] in ("settled", "converging")


coeffs = st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False), min_size=1, max_size=30)


@given(coeffs, coeffs, st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3))
def test_hilbert_apply_linear(ca, cb, a, b):
    n = max(len(ca), len(cb))
    fa = np.pad(np.array(ca, dtype=complex), (0, n - len(ca)))
    fb = np.pad(np.array(cb, dtype=complex), (0, n - len(cb)))
    lhs = hilbert_apply(PowerSeries.polynomial(a * fa + b * fb), 25).coeffs
    rhs = a * hilbert_apply(PowerSeries.polynomial(fa), 25).coeffs + b * hilbert_apply(PowerSeries.polynomial(fb), 25).coeffs
    scale = 1 + np.sum(np.abs(a * fa)) + np.sum(np.abs(b * fb))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


@given(st.lists(st.floats(0, 10), min_size=1, max_size=20), st.sampled_from(["lebesgue", "logweight", "pow:1", "atom:0.5:1"]))
def test_positivity(c, key):
    hm = HankelMoments(parse_measure(key), 24)
    b = hmu_apply(PowerSeries.polynomial(c), hm, 24).coeffs
    assert np.all(b.real >= 0) and np.all(b.imag == 0)


def test_hankel_symmetry():
    hm = HankelMoments(parse_measure("logweight"), 12)
    for n in range(12):
        for k in range(12):
            bn = hmu_apply(e(k, 12), hm, 12).coeffs[n]
            bk = hmu_apply(e(n, 12), hm, 12).coeffs[k]
            assert bn == bk
    m = hm.matrix()
    assert np.array_equal(m, m.T)


def test_hmu_examples():
    hm0 = HankelMoments(parse_measure("atom:0:1"), 10)
    b = hmu_apply(PowerSeries.polynomial(np.arange(1.0, 12.0)), hm0, 10).coeffs
    assert b[0] == 1.0 and np.all(b[1:] == 0)
    hml = HankelMoments(lebesgue(), 12)
    np.testing.assert_allclose(hmu_apply(e(3, 12), hml, 8).coeffs, 1 / (np.arange(9) + 4.0), atol=1e-14)
    hmh = HankelMoments(parse_measure("atom:0.5:1"), 10)
    np.testing.assert_allclose(hmu_apply(PowerSeries.polynomial([1.0]), hmh, 10).coeffs, 2.0 ** -np.arange(11), atol=0)


def test_hmu_order_error():
    hm = HankelMoments(lebesgue(), 5)
    with pytest.raises(OrderError):
        hmu_apply(e(8), hm, 3)
    with pytest.raises(OrderError):
        hm.matrix(10)


# ---- integral route ---------------------------------------------------------------

def test_imu_examples():
    lam = lebesgue()
    assert abs(imu_apply(Constant(1.0), lam, 0.0) - 1.0) <= 1e-14
    assert abs(imu_apply(Constant(1.0), lam, 0.5) - 2 * math.log(2)) <= 1e-14
    z = 0.4 + 0.2j
    oracle = complex(mpmath.nsum(lambda n: mpmath.mpc(z) ** n / (n + 4), [0, mpmath.inf]))
    assert abs(imu_apply(monomial(3), lam, z) - oracle) <= 1e-13


def test_imu_against_closed_form_for_singular_integrand():
    # u = 1 - t turns the integral into 4/(1-z) 2F1(1, 1/4; 5/4; z/(z-1))
    z = -0.3 + 0.8j
    oracle = complex(4 / (1 - z) * mpmath.hyp2f1(1, 0.25, 1.25, z / (z - 1)))
    assert abs(imu_apply(BoundaryPower(0.75), lebesgue(), z) - oracle) <= 1e-10


def test_imu_with_log_weight():
    z = 0.5j
    oracle = complex(mpmath.quad(lambda t: -mpmath.log(1 - t) / (1 - t * z), [0, 1]))
    assert abs(imu_apply(Constant(1.0), parse_measure("logweight"), z) - oracle) <= 1e-12


def test_imu_atoms():
    mu = parse_measure("atom:0:1")
    f = RationalKernel(0.5, 2.0)
    assert abs(imu_apply(f, mu, 0.7 + 0.1j) - 1.0) <= 1e-15


def test_imu_refuses_non_integrable():
    with pytest.raises(IllDefinedError):
        imu_apply(LogTest(), lebesgue(), 0.2)


def test_imu_domain():
    with pytest.raises(DomainError):
        imu_apply(Constant(1.0), lebesgue(), 1.0)


def test_integral_image_matches_imu():
    f = BoundaryPower(0.4)
    img = IntegralImage(f, lebesgue())
    z = np.array([0.1, 0.9 + 0.05j, -0.99, 0.999])
    np.testing.assert_allclose(img(z), imu_apply(f, lebesgue(), z), rtol=1e-10)


def test_composition_route_examples():
    assert abs(hilbert_via_composition(Constant(1.0), 0.0) - 1.0) <= 1e-14
    assert abs(hilbert_via_composition(monomial(1), 0.0) - 0.5) <= 1e-14
    f = BoundaryPower(0.25)
    assert abs(hilbert_via_composition(f, 0.9) - imu_apply(f, lebesgue(), 0.9)) <= 1e-8


def test_routes_agree_on_random_polynomials():
    rng = np.random.default_rng(5)
    z = 0.95 * rng.uniform(0, 1, 20) ** 0.5 * np.exp(2j * np.pi * rng.uniform(size=20))
    for d in (1, 6, 30):
        f = polynomial(rng.normal(size=d) + 1j * rng.normal(size=d))
        assert np.max(np.abs(imu_apply(f, lebesgue(), z) - hilbert_via_composition(f, z))) <= 1e-8


# ---- the kernel Phi ------------------------------------------------------------------

def phi_oracle(alpha, z):
    # omega = 1/(1 - v) maps (0, 1) onto (1, oo); fine for mild singularities only
    return complex(mpmath.quad(lambda v: (1 / (1 - v) - z) ** (alpha - 1) / (1 - v), [0, 1]))


def phi_closed_form(alpha, z):
    # omega = 1/u gives int_0^1 u^-alpha (1 - z u)^(alpha-1) du
    a = 1 - alpha
    return complex(mpmath.hyp2f1(a, a, a + 1, z) / a)


def test_phi_examples():
    assert abs(phi_kernel_at_one(0.5) - math.pi) <= 1e-13
    assert abs(phi_kernel(0.5, 0.0) - 2.0) <= 1e-12
    assert abs(phi_kernel(0.25, -1.0) - phi_oracle(0.25, -1.0)) <= 1e-9


@pytest.mark.parametrize("alpha", [0.3, 0.6, 0.9])
def test_phi_against_hypergeometric_form(alpha):
    for z in (0.5, -0.9 + 0.1j, 0.99j, -1.0, 0.6 + 0.8j):
        ref = phi_closed_form(alpha, z)
        assert abs(phi_kernel(alpha, z) - ref) <= 1e-12 * abs(ref)
    ref = phi_closed_form(alpha, 1.0)
    assert abs(phi_kernel_at_one(alpha) - ref) <= 1e-12 * abs(ref)


def test_phi_domain():
    with pytest.raises(DomainError):
        phi_kernel(0.5, 1.0)
    with pytest.raises(DomainError):
        phi_kernel_at_one(1.0)


@pytest.mark.parametrize("alpha", [0.3, 0.6, 0.9])
def test_factorization(alpha):
    rng = np.random.default_rng(int(alpha * 10))
    z = 0.95 * np.sqrt(rng.uniform(size=40)) * np.exp(2j * np.pi * rng.uniform(size=40))
    z = np.concatenate([z, [0.95, -0.95, 0.95j, 0.0]])
    f = BoundaryPower(alpha)
    lhs = imu_apply(f, lebesgue(), z)
    rhs = f(z) * phi_kernel(alpha, z)
    assert np.max(np.abs(lhs - rhs)) < 1e-7


# ---- partial sums ----------------------------------------------------------------------

def test_partial_sum_examples():
    tp = TentParams(4, 4)
    sup, _ = partial_sum_bound_check(PowerSeries.polynomial([1.0]), tp, 50)
    assert sup == 1.0
    sup, ratio = partial_sum_bound_check(e(5), tp, 50)
    assert abs(sup - 1 / 6) <= 1e-16
    assert abs(ratio - (1 / 6) / (1 / 21) ** 0.25) <= 1e-8


def test_partial_sum_requires_strict_regime():
    with pytest.raises(DomainError):
        partial_sum_bound_check(e(1), TentParams(2, 2), 10)
