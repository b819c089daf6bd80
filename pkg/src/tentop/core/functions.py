"""Closed-form analytic functions on the unit disc.

Every function evaluates on pairs (z, w) with w = 1 - z supplied by the
caller. Near z = 1 the caller can pass an accurately computed w, which
keeps kernels such as (1 - z)**-beta precise where 1 - z would cancel.

Each function also declares ``anchors``: boundary angles where it is
singular or sharply concentrated. The polar integrators grade their
nodes toward these angles.
"""
from __future__ import annotations

import cmath
import math

import numpy as np

from .series import PowerSeries, series_eval


def _arr(x):
    return np.asarray(x, dtype=complex)


class AnalyticFunction:
    anchors: tuple = ()
    scale: float = 0.0  # log of 1/(radial concentration distance)
    smooth: bool = False  # analytic on a neighbourhood of the closed disc
    label: str = "f"

    def at(self, z, w):
        raise NotImplementedError

    def log_abs_at(self, z, w):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.at(z, w)))

    def __call__(self, z):
        z = _arr(z)
        out = self.at(z, 1.0 - z)
        return out[()] if np.ndim(out) == 0 else out

    def __add__(self, other):
        return Sum((self, _lift(other)))

    __radd__ = __add__

    def __mul__(self, other):
        if isinstance(other, AnalyticFunction):
            return Product((self, other))
        return Scaled(complex(other), self)

    __rmul__ = __mul__

    def __repr__(self):
        return self.label


def _lift(x):
    return x if isinstance(x, AnalyticFunction) else Constant(complex(x))


class Constant(AnalyticFunction):
    smooth = True

    def __init__(self, c: complex = 1.0):
        self.c = complex(c)
        self.label = f"const({self.c:g})"

    def at(self, z, w):
        return np.full(np.shape(z), self.c, dtype=complex)


class RationalKernel(AnalyticFunction):
    """(1 - conj(alpha) z)**(-beta) for |alpha| < 1."""

    def __init__(self, alpha: complex, beta: float):
        alpha = complex(alpha)
        if not abs(alpha) < 1:
            raise ValueError("RationalKernel needs |alpha| < 1")
        self.alpha = alpha
        self.beta = float(beta)
        self.smooth = abs(alpha) < 0.5 or self.beta == 0
        if not self.smooth:
            self.anchors = (cmath.phase(alpha) % (2 * math.pi),)
            self.scale = math.log(1.0 / (1.0 - abs(alpha)))
        self.label = f"kernel({alpha.real:g}{alpha.imag:+g}j,{self.beta:g})"

    def _base(self, z, w):
        ac = self.alpha.conjugate()
        # 1 - ac z = (1 - ac) + ac w keeps precision near the anchor at 1
        return (1.0 - ac) + ac * _arr(w)

    def at(self, z, w):
        if self.beta == 0:
            return np.ones(np.shape(z), dtype=complex)
        return self._base(z, w) ** (-self.beta)

    def log_abs_at(self, z, w):
        return -self.beta * np.log(np.abs(self._base(z, w)))


class BoundaryPower(AnalyticFunction):
    """(1 - z)**(-beta), singular at z = 1 when beta > 0."""

    anchors = (0.0,)

    def __init__(self, beta: float):
        self.beta = float(beta)
        self.label = f"boundary_power({self.beta:g})"

    def at(self, z, w):
        return _arr(w) ** (-self.beta)

    def log_abs_at(self, z, w):
        with np.errstate(divide="ignore"):
            return -self.beta * np.log(np.abs(_arr(w)))


class CauchyKernel(BoundaryPower):
    """1 / (1 - z)."""

    def __init__(self):
        super().__init__(1.0)
        self.label = "cauchy"


class LogTest(AnalyticFunction):
    """1 / ((1 - z) log(e / (1 - z)))."""

    anchors = (0.0,)
    label = "logtest"

    def at(self, z, w):
        w = _arr(w)
        return 1.0 / (w * (1.0 - np.log(w)))

    def log_abs_at(self, z, w):
        w = _arr(w)
        with np.errstate(divide="ignore"):
            return -np.log(np.abs(w)) - np.log(np.abs(1.0 - np.log(w)))


class SeriesBacked(AnalyticFunction):
    """Function given by a truncated power series.

    Polynomials are smooth up to the boundary and may be evaluated on the
    closed disc; other series are restricted to |z| < 1.
    """

    def __init__(self, series: PowerSeries, label: str = "series"):
        self.series = series
        self.smooth = series.is_polynomial
        self.label = label

    def at(self, z, w):
        z = _arr(z)
        if self.series.is_polynomial:
            return np.polyval(self.series.coeffs[::-1], z)
        return series_eval(self.series, z)


def polynomial(coeffs, label: str = "poly") -> SeriesBacked:
    return SeriesBacked(PowerSeries.polynomial(coeffs), label)


def monomial(k: int) -> SeriesBacked:
    c = np.zeros(k + 1, dtype=complex)
    c[k] = 1.0
    return polynomial(c, f"z^{k}")


class Scaled(AnalyticFunction):
    def __init__(self, c: complex, f: AnalyticFunction):
        self.c = complex(c)
        self.f = f
        self.anchors = f.anchors
        self.scale = f.scale
        self.smooth = f.smooth
        self.label = f"{self.c:g}*{f.label}"

    def at(self, z, w):
        return self.c * self.f.at(z, w)

    def log_abs_at(self, z, w):
        if self.c == 0:
            return np.full(np.shape(z), -np.inf)
        return math.log(abs(self.c)) + self.f.log_abs_at(z, w)


def _merge_anchors(parts):
    seen = []
    for f in parts:
        for a in f.anchors:
            if not any(abs(a - b) < 1e-15 for b in seen):
                seen.append(a)
    return tuple(sorted(seen))


class Sum(AnalyticFunction):
    def __init__(self, terms):
        self.terms = tuple(terms)
        self.anchors = _merge_anchors(self.terms)
        self.scale = max(t.scale for t in self.terms)
        self.smooth = all(t.smooth for t in self.terms)
        self.label = "+".join(t.label for t in self.terms)

    def at(self, z, w):
        out = self.terms[0].at(z, w)
        for t in self.terms[1:]:
            out = out + t.at(z, w)
        return out


class Product(AnalyticFunction):
    def __init__(self, factors):
        self.factors = tuple(factors)
        self.anchors = _merge_anchors(self.factors)
        self.scale = max(t.scale for t in self.factors)
        self.smooth = all(t.smooth for t in self.factors)
        self.label = "*".join(t.label for t in self.factors)

    def at(self, z, w):
        out = self.factors[0].at(z, w)
        for t in self.factors[1:]:
            out = out * t.at(z, w)
        return out

    def log_abs_at(self, z, w):
        out = self.factors[0].log_abs_at(z, w)
        for t in self.factors[1:]:
            out = out + t.log_abs_at(z, w)
        return out


def automorphism(a: float, z):
    """(a + z) / (1 + a z), the disc automorphism sending 0 to a."""
    z = _arr(z)
    return (a + z) / (1.0 + a * z)


class Composed(AnalyticFunction):
    """f composed with the automorphism z -> (a + z)/(1 + a z), real a."""

    def __init__(self, f: AnalyticFunction, a: float):
        if not -1 < a < 1:
            raise ValueError("automorphism parameter must lie in (-1, 1)")
        self.f = f
        self.a = float(a)
        inv = [cmath.phase(automorphism(-self.a, cmath.exp(1j * t))) % (2 * math.pi) for t in f.anchors]
        self.anchors = tuple(sorted(0.0 if min(x, 2 * math.pi - x) < 1e-14 else x for x in inv))
        self.scale = max(0.0, f.scale + math.log((1.0 - self.a) / (1.0 + self.a)))
        self.smooth = f.smooth
        self.label = f"{f.label}@phi({self.a:g})"

    def _map(self, z, w):
        z, w = _arr(z), _arr(w)
        den = 1.0 + self.a * z
        # 1 - phi(z) = (1 - a) w / (1 + a z)
        return (self.a + z) / den, (1.0 - self.a) * w / den

    def at(self, z, w):
        return self.f.at(*self._map(z, w))

    def log_abs_at(self, z, w):
        return self.f.log_abs_at(*self._map(z, w))


def kernel_test_family(alpha: float, tp) -> AnalyticFunction:
    """(1 - alpha)**(1/p' + 1/q') / (1 - alpha z)**2, the boundedness test family."""
    expo = 1.0 / tp.p_conj + 1.0 / tp.q_conj
    return Scaled((1.0 - alpha) ** expo, RationalKernel(alpha, 2.0))
