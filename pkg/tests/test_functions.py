from __future__ import annotations

import cmath
import math

import mpmath
import numpy as np
import pytest

from tentop.core.functions import (
    BoundaryPower,
    CauchyKernel,
    Composed,
    Constant,
    LogTest,
    RationalKernel,
    automorphism,
    kernel_test_family,
    monomial,
    polynomial,
)
from tentop.tent import TentParams

mpmath.mp.dps = 40


def _accurate_pair(r, theta):
    z = r * np.exp(1j * theta)
    w = (1 - r) + 2 * r * np.sin(theta / 2) ** 2 - 1j * r * np.sin(theta)
    return z, w


def _mp_w(r, theta):
    return 1 - mpmath.mpf(r) * mpmath.expjpi(mpmath.mpf(theta) / mpmath.pi)


@pytest.mark.parametrize("r,theta", [(1 - 1e-12, 1e-13), (0.999999, 1e-7), (0.5, 2.0), (1 - 1e-15, 0.0)])
def test_boundary_power_accurate_near_one(r, theta):
    f = BoundaryPower(0.75)
    z, w = _accurate_pair(r, theta)
    oracle = complex(_mp_w(r, theta) ** mpmath.mpf(-0.75))
    assert abs(f.at(z, w) - oracle) <= 1e-12 * abs(oracle)


def test_log_abs_consistent_with_value():
    f = RationalKernel(0.9 + 0.05j, 1.5)
    z, w = _accurate_pair(0.95, 0.3)
    assert abs(f.log_abs_at(z, w) - math.log(abs(f.at(z, w)))) <= 1e-13


def test_rational_kernel_value():
    f = RationalKernel(0.5, 2.0)
    assert abs(f(0.5) - 1 / 0.75**2) <= 1e-14
    assert RationalKernel(0.3, 2.0).smooth
    g = RationalKernel(0.99, 1.0)
    assert not g.smooth and g.anchors == (0.0,)
    assert abs(g.scale - math.log(100)) <= 1e-12


def test_logtest_formula():
    z = 0.3 + 0.2j
    expected = 1 / ((1 - z) * (1 - cmath.log(1 - z)))
    assert abs(LogTest()(z) - expected) <= 1e-14


def test_cauchy_kernel():
    assert abs(CauchyKernel()(0.5) - 2.0) <= 1e-14


def test_composition_with_automorphism():
    f = BoundaryPower(0.5)
    g = Composed(f, 0.6)
    z = np.array([0.1 + 0.2j, -0.7, 0.5j])
    assert np.allclose(g(z), (1 - automorphism(0.6, z)) ** -0.5, rtol=1e-13)
    # the singular point 1 stays fixed under the automorphism
    assert g.anchors == (0.0,)
    assert abs(g.scale) < 1e-15 or g.scale == 0


def test_arithmetic_of_functions():
    f = monomial(2) + Constant(1.0)
    g = polynomial([1, 1]) * BoundaryPower(0.5)
    z = 0.25 - 0.5j
    assert abs(f(z) - (z * z + 1)) <= 1e-15
    assert abs(g(z) - (1 + z) * (1 - z) ** -0.5) <= 1e-14


def test_kernel_test_family_prefactor():
    tp = TentParams(4.0, 8.0)
    f = kernel_test_family(0.9, tp)
    expo = (1 - 1 / 4) + (1 - 1 / 8)
    assert abs(f(0.0) - 0.1**expo) <= 1e-15
    assert abs(kernel_test_family(0.0, tp)(0.3 + 0.1j) - 1.0) <= 1e-15


def test_automorphism_rejects_bad_parameter():
    with pytest.raises(ValueError):
        Composed(Constant(1.0), 1.0)
