"""Truncated complex power series with tail bookkeeping."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

DEFAULT_ORDER = 2048


class DomainError(ValueError):
    """Argument outside the domain of an operation."""


def _no_tail(r: float) -> float:
    return 0.0


@dataclass(frozen=True, eq=False)
class PowerSeries:
    """Coefficients a_0..a_N of sum a_k z^k.

    ``tail`` maps a radius r < 1 to a bound on the discarded part
    sum_{k>N} |a_k| r^k, or None when no decay model is known.
    """

    coeffs: np.ndarray
    tail: Callable[[float], float] | None = None
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if c.size == 0:
            raise ValueError("a power series needs at least one coefficient")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def is_polynomial(self) -> bool:
        return self.tail is _no_tail

    @property
    def truncation_order(self) -> int:
        return self.coeffs.size - 1

    def tail_bound(self, r: float) -> float | str:
        if self.tail is None:
            return "unknown"
        return float(self.tail(abs(r)))

    @classmethod
    def polynomial(cls, coeffs, **meta) -> "PowerSeries":
        return cls(np.asarray(coeffs, dtype=complex), _no_tail, dict(meta))

    @classmethod
    def geometric_model(cls, coeffs, ratio: float, **meta) -> "PowerSeries":
        """Series whose omitted coefficients obey |a_{N+j}| <= |a_N| ratio**j."""
        c = np.asarray(coeffs, dtype=complex)
        last = abs(c[-1])
        n = c.size - 1

        def tail(r, last=last, n=n, ratio=ratio):
            gr = ratio * r
            if gr >= 1:
                return float("inf")
            return last * r**n * gr / (1.0 - gr)

        return cls(c, tail, dict(meta))

    @classmethod
    def from_function(cls, fn: Callable, order: int = DEFAULT_ORDER, radius: float = 0.9, points: int | None = None, **meta):
        """Taylor coefficients of an analytic callable by Cauchy's formula."""
        return cls(taylor_coefficients(fn, order, radius, points), None, dict(meta))

    def __call__(self, z):
        return series_eval(self, z)

    def abs_sum(self, r: float) -> float:
        return float(np.sum(np.abs(self.coeffs) * r ** np.arange(self.coeffs.size)))

    def truncate(self, order: int) -> "PowerSeries":
        if order >= self.truncation_order:
            return self
        kept = self.coeffs[: order + 1]
        dropped = np.abs(self.coeffs[order + 1:])
        base_tail = self.tail

        def tail(r):
            own = float(np.sum(dropped * r ** np.arange(order + 1, order + 1 + dropped.size)))
            if base_tail is None:
                return float("inf")
            return own + base_tail(r)

        return PowerSeries(kept, tail if base_tail is not None else None, dict(self.meta))

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        n = min(self.truncation_order, other.truncation_order)
        a, b = self.truncate(n), other.truncate(n)
        tail = None
        if a.tail is not None and b.tail is not None:
            ta, tb = a.tail, b.tail

            def tail(r):
                return ta(r) + tb(r)

        return PowerSeries(a.coeffs + b.coeffs, tail)

    def scale(self, c: complex) -> "PowerSeries":
        tail = None
        if self.tail is not None:
            base = self.tail

            def tail(r):
                return abs(c) * base(r)

        return PowerSeries(c * self.coeffs, tail, dict(self.meta))

    def __mul__(self, other):
        if not isinstance(other, PowerSeries):
            return self.scale(other)
        return cauchy_product(self, other)

    __rmul__ = __mul__


def series_eval(s: PowerSeries, z):
    """Horner evaluation of the truncated series at |z| < 1."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1):
        raise DomainError("series_eval needs |z| < 1")
    acc = np.zeros_like(z)
    for a in s.coeffs[::-1]:
        acc = acc * z + a
    return acc[()] if acc.ndim == 0 else acc


def cauchy_product(a: PowerSeries, b: PowerSeries) -> PowerSeries:
    """Product truncated at min(N_a, N_b); the tail covers every dropped term."""
    n = min(a.truncation_order, b.truncation_order)
    full = np.convolve(a.coeffs, b.coeffs)
    kept = full[: n + 1]
    dropped = np.abs(full[n + 1:])
    ta, tb = a.tail, b.tail
    if ta is None or tb is None:
        tail = None
    else:
        def tail(r):
            own = float(np.sum(dropped * r ** np.arange(n + 1, n + 1 + dropped.size)))
            sa, sb = a.abs_sum(r), b.abs_sum(r)
            ea, eb = ta(r), tb(r)
            return own + ea * (sb + eb) + sa * eb

    return PowerSeries(kept, tail)


def taylor_coefficients(fn: Callable, order: int, radius: float = 0.9, points: int | None = None) -> np.ndarray:
    """Coefficients 0..order of fn from samples on |z| = radius via the FFT.

    ``points`` defaults to the next power of two at least 4*(order+1).
    Rounding in the samples is amplified by radius**-n in coefficient n.
    """
    if not 0 < radius < 1:
        raise DomainError("extraction radius must lie in (0, 1)")
    m = points or 1 << int(np.ceil(np.log2(4 * (order + 1))))
    if m < order + 1:
        raise ValueError("need at least order+1 sample points")
    theta = 2.0 * np.pi * np.arange(m) / m
    z = radius * np.exp(1j * theta)
    vals = np.asarray(fn(z), dtype=complex)
    c = np.fft.fft(vals) / m
    return c[: order + 1] / radius ** np.arange(order + 1)
