from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tentop.core.functions import AnalyticFunction, BoundaryPower, Constant, monomial, polynomial
from tentop.core.quadrature import QuadratureConfig
from tentop.core.series import DomainError, PowerSeries
from tentop.lab import (
    DEFAULT_SEED,
    MatrixImage,
    bergman_coefficient_check,
    bound_integrals,
    boundedness_experiment,
    compactness_probe,
    composition_bound_check,
    corpus_seed,
    critical_line_membership,
    default_alpha_grid,
    growth_catalog,
    hardy_inequality_check,
    hardy_norm,
    kernel_family_coefficients,
    lower_bound_probe,
    norm_bounds,
    operator_norm_probe,
    random_polynomials,
)
from tentop.measures import lebesgue, parse_measure
from tentop.tent import TentParams, dyadic_boxes, rho_pq

CFG = QuadratureConfig(rel_tol=1e-8)


class HilbertOfOne(AnalyticFunction):
    """-log(1 - z)/z, the image of the constant 1, summed directly."""

    anchors = (0.0,)

    def at(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        small = np.abs(z) < 1e-3
        out = np.empty(z.shape, dtype=complex)
        out[~small] = -np.log(w[~small]) / z[~small]
        zs = z[small]
        out[small] = 1 + zs / 2 + zs**2 / 3 + zs**3 / 4
        return out


# ---- bounds -------------------------------------------------------------------------

def test_bounds_at_four_four():
    lower, upper = norm_bounds(TentParams(4, 4))
    assert abs(lower - math.pi) <= 1e-12
    assert abs(upper - float(mpmath.beta(0.25, 0.5))) <= 1e-12


def test_lower_bound_four_eight():
    lower, _ = norm_bounds(TentParams(4, 8))
    assert abs(lower - math.pi / math.sin(3 * math.pi / 8)) <= 1e-12
    assert abs(lower - 3.4004353847414768) <= 1e-12


@pytest.mark.parametrize("p,q", [(2, 4), (4, 4 / 3), (3, 1.2), (1.5, 8)])
def test_bounds_outside_regime(p, q):
    with pytest.raises(DomainError, match="1/p\\+1/q < 1"):
        norm_bounds(TentParams(p, q))


@settings(max_examples=40)
@given(st.floats(2.05, 30), st.floats(0.0, 1.0))
def test_bounds_ordered_and_match_integrals(p, frac):
    # q ranges over the admissible interval 1/q < 1 - 1/p
    q_min = 1.0 / (1.0 - 1.0 / p)
    q = q_min * 1.02 + frac * 30
    tp = TentParams(p, q)
    lower, upper = norm_bounds(tp)
    assert lower < upper
    qlo, qhi, _ = bound_integrals(tp)
    assert abs(qlo - lower) <= 1e-8 * lower and abs(qhi - upper) <= 1e-8 * upper


# ---- probes ------------------------------------------------------------------------------

def test_default_alpha_grid():
    grid = default_alpha_grid()
    assert len(grid) == 11 and grid[0] == 0.0
    assert abs(grid[-1] - (1 - 1e-5)) <= 1e-15


def test_probe_at_zero_is_engine_independent():
    tp = TentParams(4, 8)
    a = operator_norm_probe(tp, [0.0], "integral")
    b = operator_norm_probe(tp, [0.0], "matrix")
    assert abs(a.ratios[0] - b.ratios[0]) <= 1e-6 * a.ratios[0]
    direct = rho_pq(HilbertOfOne(), tp, CFG).finite
    assert abs(a.ratios[0] - direct) <= 1e-6 * direct
    assert a.lower_bound < a.upper_bound and not a.bound_violations


def test_engines_agree_inside_the_disc():
    tp = TentParams(4, 4)
    a = operator_norm_probe(tp, [0.5, 0.9], "integral")
    b = operator_norm_probe(tp, [0.5, 0.9], "matrix")
    np.testing.assert_allclose(a.ratios, b.ratios, rtol=1e-6)


def test_matrix_engine_limit_reported():
    res = operator_norm_probe(TentParams(4, 4), [0.99], "matrix")
    assert math.isnan(res.ratios[0]) and "limited" in res.errors[0]


def test_matrix_image_columns():
    # the image of z^2 has coefficients 1/(n + 3)
    img = MatrixImage([0, 0, 1.0])
    for z in (0.3, 0.95 * np.exp(0.7j), -0.999):
        oracle = complex(mpmath.nsum(lambda n: mpmath.mpc(z) ** n / (n + 3), [0, mpmath.inf]))
        assert abs(img(z) - oracle) <= 1e-12 * abs(oracle)


def test_family_coefficients():
    tp = TentParams(4, 4)
    c = kernel_family_coefficients(0.5, tp)
    assert abs(c[3] - 0.5**1.5 * 4 * 0.125) <= 1e-16


def test_probe_ratios_continuous():
    tp = TentParams(4, 8)
    grid = [1 - math.exp(-x) for x in (0.0, 0.1, 0.2, 0.3)]
    res = operator_norm_probe(tp, grid)
    for a, b in zip(res.ratios, res.ratios[1:]):
        assert abs(b - a) < 0.25 * a


def test_probe_rejects_bad_grid():
    with pytest.raises(DomainError):
        operator_norm_probe(TentParams(4, 4), [0.999999])
    with pytest.raises(DomainError):
        operator_norm_probe(TentParams(2, 2), [0.0])


def test_lower_bound_probe_domain():
    with pytest.raises(DomainError):
        lower_bound_probe(TentParams(4, 4), [0.5])


# ---- experiments ---------------------------------------------------------------------

def test_boundedness_with_atom_at_origin():
    rows = boundedness_experiment(parse_measure("atom:0:1"), TentParams(4, 4), [("one", Constant(1.0))])
    assert abs(rows[0]["ratio"] - 1.0) <= 1e-12


def test_boundedness_with_lebesgue_on_small_corpus():
    tp = TentParams(4, 8)
    _, upper = norm_bounds(tp)
    corpus = [(f"poly{i}", polynomial(s.coeffs)) for i, s in enumerate(random_polynomials(4, seed=1, degree=16))]
    rows = boundedness_experiment(lebesgue(), tp, corpus)
    assert all(r["status"] == "ok" and r["ratio"] <= 2 * upper for r in rows)


def test_boundedness_records_ill_defined_inputs():
    from tentop.core.functions import LogTest

    rows = boundedness_experiment(lebesgue(), TentParams(4, 4), [("log", LogTest())])
    assert rows[0]["status"].startswith("ill-defined")


def test_compactness_with_zero_measure():
    assert compactness_probe(parse_measure("zero"), TentParams(4, 4), [0.0, 0.9]) == [0.0, 0.0]


def test_compactness_decay_for_linear_weight():
    vals = compactness_probe(parse_measure("pow:1"), TentParams(4, 4), [0.9, 0.99, 0.999])
    assert vals[0] > vals[1] > vals[2]


# ---- coefficient inequalities -----------------------------------------------------------

def test_hardy_examples():
    assert abs(hardy_inequality_check([PowerSeries.polynomial([1.0])]) - 1.0) <= 1e-15
    for k in (1, 4, 9):
        c = np.zeros(k + 1)
        c[k] = 1
        assert abs(hardy_inequality_check([PowerSeries.polynomial(c)]) - 1 / (k + 1)) <= 1e-14
    ratio = hardy_inequality_check([PowerSeries.polynomial(np.ones(33))])
    assert ratio <= math.pi


def test_hardy_norm_against_mpmath():
    s = PowerSeries.polynomial([1, 2, 0, -1j])
    oracle = mpmath.quad(lambda t: abs(1 + 2 * mpmath.expj(t) - 1j * mpmath.expj(3 * t)), [0, 2 * mpmath.pi]) / (2 * mpmath.pi)
    assert abs(hardy_norm(s) - float(oracle)) <= 1e-9


def test_hardy_inequality_on_random_corpus():
    assert hardy_inequality_check(random_polynomials(100)) <= math.pi + 1e-6


def test_bergman_examples():
    assert abs(bergman_coefficient_check([PowerSeries.polynomial([1.0])], 4) - 1.0) <= 1e-10
    ratios = []
    for k in range(6):
        c = np.zeros(k + 1)
        c[k] = 1
        ratios.append(bergman_coefficient_check([PowerSeries.polynomial(c)], 4))
        assert abs(ratios[-1] - (1 / (k + 1)) / (2 / (4 * k + 2)) ** 0.25) <= 1e-8
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
    with pytest.raises(DomainError):
        bergman_coefficient_check([PowerSeries.polynomial([1.0])], 2)


def test_bergman_ratio_bounded_under_doubling():
    corpus = random_polynomials(40)
    small = bergman_coefficient_check(corpus[:20], 4)
    large = bergman_coefficient_check(corpus, 4)
    assert math.isfinite(large) and large <= 1.25 * small


def test_composition_examples():
    boxes = dyadic_boxes(3)
    assert abs(composition_bound_check([0.0], 4, [BoundaryPower(0.125)], n_max=3) - 1.0) <= 1e-12
    assert abs(composition_bound_check([0.5, 0.9], 4, [Constant(1.0)], n_max=3) - 0.5**0.25) <= 1e-9
    assert len(boxes) == 15


def test_composition_ratio_stable_under_refinement():
    f = [BoundaryPower(1 / 8)]
    coarse = composition_bound_check([0.5, 0.9, 0.99], 4, f, n_max=4)
    fine = composition_bound_check([0.5, 0.9, 0.99], 4, f, n_max=6)
    assert coarse <= fine * (1 + 1e-9) and fine <= 1.1 * coarse


# ---- critical line ---------------------------------------------------------------------

@pytest.mark.parametrize("p,q", [(4, 4 / 3), (3, 1.5)])
def test_log_test_function_on_critical_line(p, q):
    est = critical_line_membership(TentParams(p, q))
    assert not est.diverges
    trace = [v for _, v in est.refinement_trace]
    assert abs(trace[-1] - trace[-2]) <= 5e-4 * trace[-1]


def test_critical_line_regime():
    with pytest.raises(DomainError, match="1/p\\+1/q = 1"):
        critical_line_membership(TentParams(4, 4))


# ---- corpora ------------------------------------------------------------------------------

def test_corpus_seed_default_and_override(monkeypatch):
    monkeypatch.delenv("TENTOP_SEED", raising=False)
    assert corpus_seed() == DEFAULT_SEED == 0xC0FFEE
    a = random_polynomials(3)
    monkeypatch.setenv("TENTOP_SEED", "17")
    assert corpus_seed() == 17
    b = random_polynomials(3)
    assert not np.array_equal(a[0].coeffs, b[0].coeffs) or a[0].coeffs.size != b[0].coeffs.size


def test_corpus_prefix_property():
    small, large = random_polynomials(10, seed=5), random_polynomials(20, seed=5)
    for s, t in zip(small, large):
        assert np.array_equal(s.coeffs, t.coeffs)
    assert all(s.is_polynomial and s.truncation_order <= 64 for s in large)


def test_growth_catalog_members_are_in_the_space():
    tp = TentParams(3, 3)
    for label, f in growth_catalog(tp):
        assert not rho_pq(f, tp, QuadratureConfig(rel_tol=1e-6)).diverges, label
