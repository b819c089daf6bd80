"""Tent-space functionals: the radial mixed norm, Carleson-box norms,
sequence norms over cone regions, and growth profiles."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core.functions import AnalyticFunction
from .core.quadrature import QuadratureConfig
from .core.series import DomainError
from .polar import TWO_PI, PolarRule, polar_integral
from .results import DIVERGES, NormEstimate

DIVERGENCE_CEILING = 1e8
DIVERGENCE_GROWTH = 1.10


@dataclass(frozen=True)
class TentParams:
    p: float
    q: float

    def __post_init__(self):
        if not (self.p > 1 and self.q > 1):
            raise ValueError(f"tent exponents need p, q > 1 (got p={self.p}, q={self.q})")

    @property
    def p_conj(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def q_conj(self) -> float:
        return self.q / (self.q - 1.0)

    @property
    def s(self) -> float:
        return 1.0 / self.p + 1.0 / self.q

    @property
    def critical_regime(self) -> bool:
        return abs(self.s - 1.0) <= 1e-12

    @property
    def strict_regime(self) -> bool:
        return self.s < 1.0 and not self.critical_regime

    @property
    def super_regime(self) -> bool:
        return self.s > 1.0 and not self.critical_regime

    @property
    def regime(self) -> str:
        if self.critical_regime:
            return "critical"
        return "strict" if self.strict_regime else "super"

    def __str__(self):
        return f"(p={self.p:g}, q={self.q:g})"


@dataclass(frozen=True)
class RadialGrid:
    """Refinement schedule for the polar integrator.

    Level l uses ``n_gl + 2l`` Gauss nodes per graded panel, ``n_theta * 2**l``
    trapezoid angles for boundary-smooth functions and an angular cap
    ``l_cap + 24 l`` (at most 640) in the log variable near anchors.
    """

    refinement_level: int = 0
    max_level: int = 4
    n_theta: int = 128
    n_gl: int = 8
    n_r: int = 24
    l_cap: float = 48.0
    margin: float = 30.0

    def __post_init__(self):
        if self.refinement_level < 0 or self.max_level < self.refinement_level + 1:
            raise ValueError("need 0 <= refinement_level < max_level")
        if min(self.n_theta, self.n_gl, self.n_r) < 1 or not (self.l_cap > 0 and self.margin > 0):
            raise ValueError("grid sizes, l_cap and margin must be positive")

    def rule(self, level: int, rel_tol: float | None = None) -> PolarRule:
        """Rule at ``level``; a looser ``rel_tol`` shortens the truncation margins."""
        margin, negligible = self.margin, 1e-15
        if rel_tol is not None:
            digits = math.log(1.0 / max(rel_tol, 1e-16))
            margin = min(self.margin, digits + 8.0)
            negligible = min(1e-3 * rel_tol, 1e-9)
        return PolarRule(
            n_gl=self.n_gl + 2 * level,
            n_theta=self.n_theta * 2**level,
            n_r=self.n_r + 8 * level,
            l_cap=min(640.0, self.l_cap + 24.0 * level),
            margin=margin,
            negligible=negligible,
        )

    @property
    def theta_nodes(self):
        """Uniform angles and weights at the starting level (boundary-smooth case)."""
        n = self.n_theta * 2**self.refinement_level
        return TWO_PI * np.arange(n) / n, np.full(n, TWO_PI / n)

    @property
    def r_gap(self) -> float:
        """1 - r_cutoff: the innermost radial node sits this close to the circle."""
        return self.rule(self.refinement_level).r_gap

    @property
    def r_cutoff(self) -> float:
        return 1.0 - self.r_gap


def _refine(compute, cfg: QuadratureConfig, grid: RadialGrid, label: str) -> NormEstimate:
    """Run ``compute(rule)`` over refinement levels until the value settles.

    ``compute`` returns (value, engine_diverges, reason). Divergence is
    declared when the engine finds a non-integrable tail at two
    consecutive levels, or when the value passes the ceiling while still
    growing by at least 10% per level.
    """
    trace = []
    flags = []
    reason = ""
    for level in range(grid.refinement_level, grid.max_level + 1):
        value, div, why = compute(grid.rule(level, cfg.rel_tol))
        trace.append((level, value))
        flags.append(div)
        if div:
            reason = why
        if len(trace) >= 2 and flags[-1] and flags[-2]:
            return NormEstimate(DIVERGES, math.inf, tuple(trace), {"reason": reason, "function": label})
        if len(trace) >= 3:
            v0, v1, v2 = (t[1] for t in trace[-3:])
            if v2 > DIVERGENCE_CEILING and v2 >= DIVERGENCE_GROWTH * v1 and v1 >= DIVERGENCE_GROWTH * v0:
                return NormEstimate(DIVERGES, math.inf, tuple(trace), {"reason": "ceiling exceeded while growing", "function": label})
        if len(trace) >= 2 and not div:
            prev = trace[-2][1]
            err = abs(value - prev)
            if err <= max(cfg.rel_tol * abs(value), cfg.abs_tol):
                return NormEstimate(value, err, tuple(trace), {"converged": True, "function": label})
    err = abs(trace[-1][1] - trace[-2][1])
    if flags[-1]:
        return NormEstimate(DIVERGES, math.inf, tuple(trace), {"reason": reason, "function": label})
    return NormEstimate(trace[-1][1], err, tuple(trace), {"converged": False, "function": label})


def rho_pq(f: AnalyticFunction, tp: TentParams, cfg: QuadratureConfig | None = None, grid: RadialGrid | None = None) -> NormEstimate:
    """Radial mixed norm (int (int_0^1 |f(r e^{it})|^p dr)^{q/p} dt/2pi)^{1/q}."""
    cfg = cfg or QuadratureConfig(rel_tol=1e-8)
    grid = grid or RadialGrid()
    p, q = tp.p, tp.q

    def compute(rule):
        out = polar_integral(f, p, q / p, 0.0, TWO_PI, 0.0, rule)
        if out.log_value == -math.inf:
            return 0.0, out.diverges, out.reason
        value = math.exp(min(700.0, (out.log_value - math.log(TWO_PI)) / q))
        return value, out.diverges, out.reason

    return _refine(compute, cfg, grid, repr(f))


def bergman_norm(f: AnalyticFunction, p: float, cfg: QuadratureConfig | None = None, grid: RadialGrid | None = None) -> NormEstimate:
    """(int_D |f|^p dA)^{1/p} with normalized area measure dA = r dr dt / pi."""
    cfg = cfg or QuadratureConfig(rel_tol=1e-8)
    grid = grid or RadialGrid()

    def compute(rule):
        out = polar_integral(f, p, 1.0, 0.0, TWO_PI, 0.0, rule, area=True)
        if out.log_value == -math.inf:
            return 0.0, out.diverges, out.reason
        return math.exp(min(700.0, out.log_value / p)), out.diverges, out.reason

    return _refine(compute, cfg, grid, repr(f))


@dataclass(frozen=True)
class CarlesonBox:
    """Tent over the arc [theta, theta + length): radii 1 - length < |z| < 1."""

    theta: float
    length: float

    @property
    def r_lo(self) -> float:
        return max(0.0, 1.0 - self.length)

    @property
    def normalized_length(self) -> float:
        return self.length / TWO_PI


def dyadic_boxes(n_max: int, rotations: int = 1):
    """Boxes over the arcs [2 pi j / 2^n, 2 pi (j+1) / 2^n), n = 0..n_max.

    ``rotations`` > 1 adds boxes shifted by fractions of their own length.
    """
    boxes = []
    for n in range(n_max + 1):
        length = TWO_PI / 2**n
        for j in range(2**n):
            for k in range(rotations):
                boxes.append(CarlesonBox((j + k / rotations) * length % TWO_PI, length))
    return boxes


def box_average(f: AnalyticFunction, p: float, box: CarlesonBox, rule: PolarRule | None = None):
    """(1/|I|) int_{S(I)} |f|^p dA with |I| the normalized arc length.

    Returns (value, diverges, reason); value is the p-th power average.
    """
    lo = box.theta
    hi = box.theta + box.length
    if hi > TWO_PI + 1e-15:
        # wrap-around arc: rotate so the arc starts at 0
        parts = [(lo, TWO_PI), (0.0, hi - TWO_PI)]
    else:
        parts = [(lo, min(hi, TWO_PI))]
    logs, div, why = [], False, []
    for a, b in parts:
        if b - a <= 0:
            continue
        out = polar_integral(f, p, 1.0, a, b, box.r_lo, rule, area=True)
        logs.append(out.log_value)
        if out.diverges:
            div = True
            why.append(out.reason)
    logs = [v for v in logs if v != -math.inf]
    if not logs:
        return 0.0, div, "; ".join(why)
    total = math.exp(min(700.0, float(np.logaddexp.reduce(logs))))
    return total / box.normalized_length, div, "; ".join(why)


def tent_p_infty_norm(f: AnalyticFunction, p: float, box_grid=None, cfg: QuadratureConfig | None = None, levels: int = 2) -> NormEstimate:
    """sup over boxes of ((1/|I|) int_{S(I)} |f|^p dA)^{1/p}.

    The sup is evaluated at ``levels`` successive rules; the change gives
    the error estimate. Any box with a non-integrable singularity makes
    the norm infinite.
    """
    if p < 1:
        raise ValueError("tent_p_infty_norm needs p >= 1")
    cfg = cfg or QuadratureConfig(rel_tol=1e-6)
    boxes = list(box_grid) if box_grid is not None else dyadic_boxes(8)
    grid = RadialGrid()
    trace = []
    best_box = None
    for level in range(levels):
        rule = grid.rule(level)
        best = 0.0
        for box in boxes:
            val, div, why = box_average(f, p, box, rule)
            if div:
                trace.append((level, math.inf))
                return NormEstimate(DIVERGES, math.inf, tuple(trace), {"reason": why, "box": (box.theta, box.length)})
            if val > best:
                best, best_box = val, box
        trace.append((level, best ** (1.0 / p)))
    value = trace[-1][1]
    err = abs(trace[-1][1] - trace[-2][1]) if len(trace) > 1 else 0.0
    detail = {"box": (best_box.theta, best_box.length) if best_box else None, "boxes": len(boxes)}
    return NormEstimate(value, err, tuple(trace), detail)


# ---- cone regions and sequence norms --------------------------------------

_COS30 = math.cos(math.pi / 6)


def in_cone(z, xi_angle):
    """Membership of z in the cone region over e^{i xi}: the convex hull of
    the disc |z| < 1/2 and the boundary point."""
    z = np.asarray(z, dtype=complex)
    xi = np.exp(1j * np.asarray(xi_angle, dtype=float))
    v = z - xi
    dist = np.abs(v)
    proj = np.real(v * np.conj(-xi))  # component of z - xi along the axis toward 0
    with np.errstate(invalid="ignore", divide="ignore"):
        inside_angle = proj >= _COS30 * dist
    return (np.abs(z) < 0.5) | (inside_angle & (proj <= 0.75) & (dist > 0))


def cone_half_angle(radius: float) -> float:
    """Half-width of the arc of boundary points xi whose cone contains a point
    of modulus ``radius``; found by bisection on :func:`in_cone`."""
    if radius < 0.5:
        return math.pi
    lo, hi = 0.0, math.pi
    for _ in range(200):
        if hi - lo <= 4 * np.spacing(hi):
            break
        mid = 0.5 * (lo + hi)
        if in_cone(radius, mid):
            lo = mid
        else:
            hi = mid
    return lo


def _check_points(points):
    z = np.asarray(points, dtype=complex).ravel()
    if np.any(np.abs(z) >= 1):
        raise DomainError("sequence_tent_norm needs every |z_k| < 1")
    return z


def _arcs(z, half_angles):
    """Split each arc [c - h, c + h] into pieces inside [0, 2 pi)."""
    out = []
    for k, (zk, h) in enumerate(zip(z, half_angles)):
        if h >= math.pi:
            out.append((0.0, TWO_PI, k))
            continue
        c = math.atan2(zk.imag, zk.real) % TWO_PI
        lo, hi = c - h, c + h
        if lo < 0:
            out += [(lo + TWO_PI, TWO_PI, k), (0.0, hi, k)]
        elif hi > TWO_PI:
            out += [(lo, TWO_PI, k), (0.0, hi - TWO_PI, k)]
        else:
            out.append((lo, hi, k))
    return out


def sequence_tent_norm(points, values, tp: TentParams, mode: str = "pq") -> float:
    """Discrete tent norms of a sequence attached to points of the disc.

    mode "pq":      (int (sum_{z_k in cone(xi)} |l_k|^p)^{q/p} dxi/2pi)^{1/q}
    mode "infty_q": the same with the inner sum replaced by a max
    mode "p_infty": sup over dyadic arcs I of ((1/|I|) sum_{z_k in S(I)} |l_k|^p (1-|z_k|^2))^{1/p}

    The inner sum is piecewise constant in xi between arc endpoints, so
    the outer integral is evaluated exactly over those pieces.
    """
    z = _check_points(points)
    lam = np.abs(np.asarray(values, dtype=complex).ravel())
    if lam.size != z.size:
        raise ValueError("points and values differ in length")
    if z.size == 0:
        return 0.0
    p, q = tp.p, tp.q
    if mode == "p_infty":
        return _sequence_p_infty(z, lam, p)
    if mode not in ("pq", "infty_q"):
        raise ValueError(f"unknown mode {mode!r}")
    halves = {}
    for rad in np.abs(z):
        if rad not in halves:
            halves[rad] = cone_half_angle(float(rad))
    arcs = _arcs(z, [halves[r] for r in np.abs(z)])
    edges = np.unique(np.concatenate([[0.0, TWO_PI], [a for a, _, _ in arcs], [b for _, b, _ in arcs]]))
    acc = np.zeros(edges.size - 1)
    for lo, hi, k in arcs:
        i, j = np.searchsorted(edges, [lo, hi])
        if mode == "pq":
            acc[i:j] += lam[k] ** p
        else:
            np.maximum(acc[i:j], lam[k], out=acc[i:j])
    widths = np.diff(edges) / TWO_PI
    if mode == "pq":
        return float(math.fsum(widths * acc ** (q / p)) ** (1.0 / q))
    return float(math.fsum(widths * acc**q) ** (1.0 / q))


def _sequence_p_infty(z, lam, p):
    rad = np.abs(z)
    ang = np.mod(np.angle(z), TWO_PI)
    weight = lam**p * (1.0 - rad**2)
    deepest = math.ceil(math.log2(TWO_PI / float(np.min(1.0 - rad)))) + 2
    best = 0.0
    for n in range(min(deepest, 48) + 1):
        length = TWO_PI / 2**n
        j = np.minimum((ang / length).astype(int), 2**n - 1)
        sel = rad > 1.0 - length
        if not np.any(sel):
            continue
        sums = np.bincount(j[sel], weights=weight[sel])
        best = max(best, float(sums.max()) / (length / TWO_PI))
    return best ** (1.0 / p)


def growth_profile(f: AnalyticFunction, tp: TentParams, radii, n_theta: int = 4096):
    """Pairs (r, max_theta |f(r e^{i theta})| * (1 - r)^{1/p + 1/q})."""
    theta = TWO_PI * np.arange(n_theta) / n_theta
    extra = []
    for a in f.anchors:
        extra.extend([a, a + 1e-9, a - 1e-9])
    theta = np.concatenate([theta, np.asarray(extra, dtype=float)])
    out = []
    for r in radii:
        rc = 1.0 - r
        s = np.sin(0.5 * theta)
        z = r * np.exp(1j * theta)
        w = rc + 2.0 * r * s * s - 1j * r * np.sin(theta)
        peak = float(np.max(np.exp(f.log_abs_at(z, w))))
        out.append((float(r), peak * rc**tp.s))
    return out
