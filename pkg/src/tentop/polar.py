"""Graded polar quadrature for iterated integrals over disc sectors.

Computes

    J = int_{theta_lo}^{theta_hi} ( int_{r_lo}^1 |f(r e^{i theta})|^p omega(r) dr )^outer dtheta

with omega(r) = 1 or r/pi. Functions that are smooth on the closed disc
use tensor Gauss (or periodic trapezoid) rules. Functions with boundary
anchors get a graded rule: angles near an anchor are parametrized as
theta = anchor +- exp(-L), radii near the circle as r = 1 - exp(-m), and
both log variables are integrated on unit Gauss-Legendre panels. Sums are
kept in log space so that strongly singular integrands do not overflow.

The angular march toward an anchor stops once the remaining tail is
negligible, or at a cap ``l_cap``. At the cap the tail is extrapolated
from a fitted model of log G(L), where G(L) dL is the angular integrand
in the log variable. Two models compete:

    exponential  log G = c + sigma L
    algebraic    log G = c - kappa log L + a / L

The tail is integrable iff sigma < 0 (exponential) or kappa > 1
(algebraic). A non-integrable fit is the divergence verdict.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .core.quadrature import NonConvergenceError, QuadratureConfig, composite_gauss, gauss_legendre, integrate_01

TWO_PI = 2.0 * math.pi
_M_MAX = 700.0  # exp(-700) is still a normal double
_SIGMA_FLAT = 1e-3
_KAPPA_MIN = 1.02


@dataclass(frozen=True)
class PolarRule:
    n_gl: int = 8
    n_theta: int = 128
    r_panels: int = 4
    n_r: int = 24
    l_cap: float = 48.0
    margin: float = 30.0
    eta: float = 0.125
    bulk_width: float = 0.25
    negligible: float = 1e-15

    @property
    def r_gap(self) -> float:
        return math.exp(-min(_M_MAX, self.l_cap + self.margin))


@dataclass
class PolarOutcome:
    log_value: float
    diverges: bool = False
    reason: str = ""
    log_tail: float = -math.inf
    nodes: int = 0
    fits: list = field(default_factory=list)

    @property
    def value(self) -> float:
        try:
            return math.exp(self.log_value)
        except OverflowError:
            return math.inf

    @property
    def tail_fraction(self) -> float:
        if self.log_value == -math.inf:
            return 0.0
        return math.exp(self.log_tail - self.log_value)


def _lse(values) -> float:
    values = [v for v in values if v != -math.inf]
    if not values:
        return -math.inf
    return float(logsumexp(values))


def _radial_nodes(r_lo, m_top, rule, m_flat=None):
    """Radial nodes as (r, 1 - r, log weight) for r in [r_lo, 1).

    Unit panels in m = log(1/(1-r)) up to ``m_flat``; beyond it the
    integrand is assumed to have flattened (|f| settles once 1 - r is
    well below the angular distance to the anchor) and panel widths double.
    """
    x, w = gauss_legendre(rule.n_gl)
    parts_r, parts_rc, parts_lw = [], [], []
    if r_lo < 0.5:
        panels = max(1, math.ceil((0.5 - r_lo) / 0.25))
        r, wr = composite_gauss(r_lo, 0.5, panels, rule.n_gl)
        parts_r.append(r)
        parts_rc.append(1.0 - r)
        parts_lw.append(np.log(wr))
        m_lo = math.log(2.0)
    else:
        m_lo = -math.log1p(-r_lo) if r_lo > 0 else 0.0
    m_top = min(_M_MAX, max(m_top, m_lo + 1.0))
    flat = m_top if m_flat is None else min(m_top, max(m_flat, m_lo + 1.0))
    edges = list(np.arange(m_lo, flat, 1.0)) + [flat]
    width = 2.0
    while edges[-1] < m_top:
        edges.append(min(_M_MAX, edges[-1] + width))
        width *= 2.0
    edges = np.asarray(edges)
    lo, wd = edges[:-1], np.diff(edges)
    keep = wd > 0
    lo, wd = lo[keep], wd[keep]
    m = (lo[:, None] + wd[:, None] * x[None, :]).ravel()
    wm = (wd[:, None] * w[None, :]).ravel()
    rc = np.exp(-m)
    parts_r.append(1.0 - rc)
    parts_rc.append(rc)
    parts_lw.append(np.log(wm) - m)
    return np.concatenate(parts_r), np.concatenate(parts_rc), np.concatenate(parts_lw)


def _smooth_radial_nodes(r_lo, rule):
    r, wr = composite_gauss(r_lo, 1.0, rule.r_panels, rule.n_r)
    return r, 1.0 - r, np.log(wr)


def _inner_log(f, p, phi, delta, radial, area):
    """log of int |f|^p omega dr at angles phi + delta, one value per angle."""
    r, rc, lw = radial
    if area:
        lw = lw + np.log(r / math.pi)
    delta = np.asarray(delta, dtype=float)
    out = np.empty(delta.size)
    chunk = max(1, 60000 // r.size)
    for i in range(0, delta.size, chunk):
        d = delta[i:i + chunk, None]
        theta = phi + d
        z = r[None, :] * np.exp(1j * theta)
        if phi == 0.0:
            s = np.sin(0.5 * d)
            w = rc[None, :] + 2.0 * r[None, :] * s * s - 1j * r[None, :] * np.sin(d)
        else:
            w = 1.0 - z
        la = f.log_abs_at(z, w)
        if np.any(np.isnan(la)) or np.any(la == np.inf):
            raise NonConvergenceError(f"non-finite values of {f!r} inside the disc")
        out[i:i + chunk] = logsumexp(p * la + lw[None, :], axis=1)
    return out


def _fit_models(L, y):
    """Least-squares fits of the exponential and algebraic tail models."""
    A = np.column_stack([np.ones_like(L), L])
    cE, resE = np.linalg.lstsq(A, y, rcond=None)[:2]
    B = np.column_stack([np.ones_like(L), -np.log(L), 1.0 / L])
    cP, resP = np.linalg.lstsq(B, y, rcond=None)[:2]
    rmsE = math.sqrt(float(resE[0]) / L.size) if resE.size else 0.0
    rmsP = math.sqrt(float(resP[0]) / L.size) if resP.size else 0.0
    return (float(cE[0]), float(cE[1]), rmsE), (float(cP[0]), float(cP[1]), float(cP[2]), rmsP)


def _tail_from_fit(L_end, fitE, fitP):
    """Return (model, integrable, log tail beyond L_end, description)."""
    cE, sigma, rmsE = fitE
    cP, kappa, a, rmsP = fitP
    use_alg = rmsP < 0.5 * rmsE
    if not use_alg:
        if sigma < -_SIGMA_FLAT:
            return "exponential", True, cE + sigma * L_end - math.log(-sigma), f"sigma={sigma:.6g}"
        return "exponential", False, math.inf, f"sigma={sigma:.6g}"
    if kappa > _KAPPA_MIN:
        # int_{L_end}^inf e^{cP} L^-kappa e^{a/L} dL, substituting L = L_end / u
        def g(u):
            return u ** (kappa - 2.0) * np.exp(a * u / L_end)

        res = integrate_01(g, QuadratureConfig(rel_tol=1e-10, abs_tol=1e-300))
        val = float(np.real(res.value))
        return "algebraic", True, cP + (1.0 - kappa) * math.log(L_end) + math.log(val), f"kappa={kappa:.6g}"
    return "algebraic", False, math.inf, f"kappa={kappa:.6g}"


def _anchor_side(f, p, outer, phi, sign, L0, r_lo, area, rule, scale):
    """Angular integral over theta = phi + sign*exp(-L), L >= L0, in log form."""
    x, wx = gauss_legendre(rule.n_gl)
    Ls, ys, logs = [], [], []
    L = L0
    batch = 4
    nodes = 0
    while True:
        # unit panels early on, width-2 panels once the integrand is a smooth exponential
        pw = 1.0 if L - L0 < 8 else 2.0
        Lk = (L + pw * np.arange(batch)[:, None] + pw * x[None, :]).ravel()
        wk = np.tile(wx, batch) * pw
        m_top = max(L + pw * batch, scale) + rule.margin
        radial = _radial_nodes(r_lo, m_top, rule, m_flat=max(L + pw * batch, scale) + 4.0)
        li = _inner_log(f, p, phi, sign * np.exp(-Lk), radial, area)
        nodes += Lk.size * radial[0].size
        y = -Lk + outer * li
        Ls.append(Lk)
        ys.append(y)
        logs.append(_lse(y + np.log(wk)))
        L += pw * batch
        total = _lse(logs)
        if total == -math.inf and L - L0 >= 8:
            return PolarOutcome(-math.inf, nodes=nodes)
        allL = np.concatenate(Ls)
        ally = np.concatenate(ys)
        if L - L0 >= 8:
            sel = allL >= L - max(8.0, 0.5 * (L - L0))
            sel &= np.isfinite(ally)
            if sel.sum() >= 6:
                fitE, fitP = _fit_models(allL[sel], ally[sel])
                cE, sigma, _ = fitE
                if sigma < -0.05:
                    log_tail = cE + sigma * L - math.log(-sigma)
                    if log_tail - total < math.log(rule.negligible):
                        out = PolarOutcome(_lse([total, log_tail]), nodes=nodes, log_tail=log_tail)
                        out.fits.append(("exponential", fitE))
                        return out
                if L >= rule.l_cap:
                    model, ok, log_tail, note = _tail_from_fit(L, fitE, fitP)
                    out = PolarOutcome(total, nodes=nodes)
                    out.fits.append((model, fitE, fitP))
                    if ok:
                        out.log_value = _lse([total, log_tail])
                        out.log_tail = log_tail
                    else:
                        out.diverges = True
                        out.reason = f"non-integrable angular tail near angle {phi:.6g} ({model} fit, {note})"
                    return out
            elif L >= rule.l_cap:
                return PolarOutcome(total, nodes=nodes)


def _segments(theta_lo, theta_hi, anchors, periodic):
    """Split [theta_lo, theta_hi] at anchors; flag which ends are anchors."""
    pts = sorted({a for a in anchors if theta_lo < a < theta_hi})
    ends_lo = any(abs(a - theta_lo) < 1e-15 for a in anchors)
    ends_hi = any(abs(a - theta_hi) < 1e-15 for a in anchors)
    if periodic:
        at_zero = any(a < 1e-15 or TWO_PI - a < 1e-15 for a in anchors)
        ends_lo = ends_hi = at_zero
    bounds = [theta_lo] + pts + [theta_hi]
    segs = []
    for i in range(len(bounds) - 1):
        segs.append((bounds[i], bounds[i + 1], ends_lo if i == 0 else True, ends_hi if i == len(bounds) - 2 else True))
    return segs


def polar_integral(f, p, outer, theta_lo, theta_hi, r_lo=0.0, rule: PolarRule | None = None, area=False) -> PolarOutcome:
    rule = rule or PolarRule()
    periodic = abs(theta_hi - theta_lo - TWO_PI) < 1e-15
    anchors = [a % TWO_PI for a in f.anchors]
    if periodic:
        anchors = [a + theta_lo if abs(a) < 1e-15 else a for a in anchors]
    else:
        anchors = anchors + [a + TWO_PI for a in anchors]
    if f.smooth or not anchors:
        return _smooth(f, p, outer, theta_lo, theta_hi, r_lo, rule, area, periodic, graded=not f.smooth)

    logs = []
    log_tail_parts = []
    diverges = False
    reasons = []
    nodes = 0
    fits = []
    for a, b, anchor_a, anchor_b in _segments(theta_lo, theta_hi, anchors, periodic):
        eta = min(rule.eta, (b - a) / 3.0)
        lo = a + eta if anchor_a else a
        hi = b - eta if anchor_b else b
        if hi > lo:
            panels = max(1, math.ceil((hi - lo) / rule.bulk_width))
            th, wt = composite_gauss(lo, hi, panels, rule.n_gl)
            m_top = max(math.log(1.0 / eta), f.scale) + rule.margin
            radial = _radial_nodes(r_lo, m_top, rule)
            li = _inner_log(f, p, 0.0, th, radial, area)
            logs.append(_lse(outer * li + np.log(wt)))
            nodes += th.size * radial[0].size
        for is_anchor, phi, sign in ((anchor_a, a, 1.0), (anchor_b, b, -1.0)):
            if not is_anchor:
                continue
            base = 0.0 if (abs(phi) < 1e-15 or abs(phi - TWO_PI) < 1e-15) else phi
            side = _anchor_side(f, p, outer, base, sign, math.log(1.0 / eta), r_lo, area, rule, f.scale)
            logs.append(side.log_value)
            log_tail_parts.append(side.log_tail)
            nodes += side.nodes
            fits.extend(side.fits)
            if side.diverges:
                diverges = True
                reasons.append(side.reason)
    out = PolarOutcome(_lse(logs), diverges, "; ".join(reasons), _lse(log_tail_parts), nodes, fits)
    return out


def _smooth(f, p, outer, theta_lo, theta_hi, r_lo, rule, area, periodic, graded):
    if periodic:
        n = rule.n_theta
        th = theta_lo + TWO_PI * np.arange(n) / n
        wt = np.full(n, TWO_PI / n)
    else:
        panels = max(1, math.ceil((theta_hi - theta_lo) / (4 * rule.bulk_width)))
        th, wt = composite_gauss(theta_lo, theta_hi, panels, max(rule.n_gl, rule.n_theta // 8))
    if graded:
        radial = _radial_nodes(r_lo, f.scale + rule.margin, rule)
    else:
        radial = _smooth_radial_nodes(r_lo, rule)
    li = _inner_log(f, p, 0.0, th, radial, area)
    return PolarOutcome(_lse(outer * li + np.log(wt)), nodes=th.size * radial[0].size)
