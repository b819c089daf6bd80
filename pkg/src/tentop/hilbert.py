"""The Hilbert matrix, its moment-generated generalization, the integral
operator against a radial measure, the weighted-composition route and
the kernel Phi_alpha."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core.functions import AnalyticFunction, SeriesBacked
from .core.quadrature import NonConvergenceError, QuadratureConfig, composite_gauss, gauss_legendre, integrate_01
from .core.series import DomainError, PowerSeries
from .core.special import beta_fn
from .measures import RadialMeasure, lebesgue, moment
from .tent import TentParams, rho_pq

_M_MAX = 690.0


class IllDefinedError(ValueError):
    """The integral operator is not defined on this input."""


class OrderError(ValueError):
    """Not enough cached moments for the requested matrix order."""


# ---- coefficient routes -------------------------------------------------------

def _compensated(terms: np.ndarray) -> complex:
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def definedness_certificate(coeffs, weights_fn=None, start: int = 4):
    """Growth trend of b_0 = sum_k a_k w_k under doubling of the truncation.

    Returns a dict with the partial sums at N = 2^j, their increments, and
    a trend: "settled" (increments vanish), "converging" (increment
    ratios bounded below 1 and not creeping up) or "growing".
    """
    a = np.asarray(coeffs, dtype=complex)
    k = np.arange(a.size)
    terms = a * (weights_fn(k) if weights_fn else 1.0 / (k + 1.0))
    sizes = []
    n = 2**start
    while n < a.size:
        sizes.append(n)
        n *= 2
    sizes.append(a.size)
    sums = [abs(_compensated(terms[:m])) for m in sizes]
    inc = np.abs(np.diff(sums))
    if inc.size < 3:
        trend = "settled" if inc.size == 0 or inc[-1] == 0 else "undetermined"
    elif inc[-1] <= 1e-15 * max(sums[-1], 1e-300):
        trend = "settled"
    else:
        ratios = inc[1:] / np.maximum(inc[:-1], 1e-300)
        tail = ratios[-3:]
        creeping = bool(np.all(np.diff(tail) > 0)) and tail[-1] > 0.8
        trend = "growing" if creeping or tail[-1] >= 1.0 else "converging"
    return {"sizes": sizes, "partial_sums": sums, "trend": trend}


def hilbert_apply(f: PowerSeries, n_out: int) -> PowerSeries:
    """b_n = sum_{k <= N_in} a_k / (n + k + 1), n = 0..n_out, compensated sums."""
    a = f.coeffs
    k = np.arange(a.size)
    b = np.array([_compensated(a / (n + k + 1.0)) for n in range(n_out + 1)])
    tail = None
    if f.tail is not None:
        e_in = f.tail(1.0)
        mass = float(np.sum(np.abs(a))) + e_in
        n_in = f.truncation_order
        if math.isfinite(mass):
            def tail(r):
                idx = np.arange(n_out + 1)
                coef_err = float(np.sum(e_in * r**idx / (idx + n_in + 2.0)))
                if r >= 1:
                    return math.inf
                return coef_err + mass * r ** (n_out + 1) / ((n_out + 2.0) * (1.0 - r))

    cert = definedness_certificate(a)
    return PowerSeries(b, tail, {"definedness": cert})


@dataclass(frozen=True, eq=False)
class HankelMoments:
    """Moments mu_0..mu_{2N} of a radial measure, computed once."""

    mu: RadialMeasure
    order: int
    cached_moments: np.ndarray = None

    def __post_init__(self):
        if self.cached_moments is None:
            vals = np.array([moment(self.mu, n) for n in range(2 * self.order + 1)])
            vals.setflags(write=False)
            object.__setattr__(self, "cached_moments", vals)

    def matrix(self, size: int | None = None) -> np.ndarray:
        n = self.order + 1 if size is None else size
        if 2 * (n - 1) >= self.cached_moments.size:
            raise OrderError("matrix larger than the cached moments allow")
        idx = np.arange(n)
        return self.cached_moments[idx[:, None] + idx[None, :]]


def hmu_apply(f: PowerSeries, hm: HankelMoments, n_out: int) -> PowerSeries:
    """b_n = sum_{k <= N_in} mu_{n+k} a_k."""
    n_in = f.truncation_order
    if hm.order < max(n_in, n_out):
        raise OrderError(f"moments cached to order {hm.order}, need {max(n_in, n_out)}")
    a = f.coeffs
    mom = hm.cached_moments
    b = np.array([_compensated(mom[n:n + n_in + 1] * a) for n in range(n_out + 1)])
    tail = None
    if f.tail is not None:
        e_in = f.tail(1.0)
        mu0 = float(mom[0])
        mass = float(np.sum(np.abs(a))) + e_in

        def tail(r):
            if r >= 1:
                return math.inf
            return mu0 * (e_in / (1.0 - r) + mass * r ** (n_out + 1) / (1.0 - r))

    return PowerSeries(b, tail)


# ---- integral route -------------------------------------------------------------

@dataclass(frozen=True)
class MeasureRule:
    """Nodes for int_0^1 g(t) dmu(t): Gauss panels on [0, 1/2], unit
    panels in m = log(1/(1-t)) beyond, and the atoms.

    Nodes are ordered by increasing m so a prefix is a shallower rule.
    """

    t: np.ndarray
    tc: np.ndarray
    weights: np.ndarray  # density weights including the Jacobian
    depth: np.ndarray  # m of each node (0 on the regular part)
    atom_t: np.ndarray
    atom_mass: np.ndarray
    f_depth: float
    margin: float

    def prefix(self, w_min: float) -> int:
        """Number of leading nodes needed for points with |1 - z| >= w_min."""
        need = self.f_depth
        if w_min < 1:
            need = max(need, math.log(1.0 / max(w_min, 1e-300)) + self.margin)
        return int(np.searchsorted(self.depth, need, side="right"))


def _density_nodes(mu, n, m_top):
    x, w = composite_gauss(0.0, 0.5, 2, n)
    panels = max(1, math.ceil(m_top - math.log(2.0)))
    m, wm = composite_gauss(math.log(2.0), math.log(2.0) + panels, panels, n)
    tc = np.concatenate([1.0 - x, np.exp(-m)])
    t = np.concatenate([x, -np.expm1(-m)])
    wts = np.concatenate([w, wm * np.exp(-m)])
    depth = np.concatenate([np.zeros_like(x), m])
    dens = np.asarray(mu.density(t, tc), dtype=float) if mu.density is not None else np.zeros_like(t)
    return t, tc, wts * dens, depth


def integrability_depth(f: AnalyticFunction, mu: RadialMeasure, n: int = 10, negligible: float = 1e-17):
    """Depth m such that int_{t > 1 - e^-m} |f| dmu is negligible.

    Marches unit panels in m = log(1/(1-t)); raises IllDefinedError when
    int |f| dmu fails to settle before t = 1 - e^-690, which is how the
    pre-check recognizes a divergent kernel integral.
    """
    if mu.density is None:
        return 1.0, float(sum(m * abs(complex(f(t))) for t, m in mu.atoms))
    x, w = gauss_legendre(n)
    xr, wr = composite_gauss(0.0, 0.5, 2, n)
    reg = np.abs(f.at(xr.astype(complex), (1.0 - xr).astype(complex))) * mu.density(xr, 1.0 - xr)
    total = float(np.sum(wr * reg))
    m = math.log(2.0)
    quiet = 0
    piece = 0.0
    while m < _M_MAX:
        mm = m + x
        tc = np.exp(-mm)
        t = -np.expm1(-mm)
        vals = np.abs(f.at(t.astype(complex), tc.astype(complex))) * mu.density(t, tc) * tc
        if not np.all(np.isfinite(vals)):
            raise IllDefinedError(f"|{f!r}| is not finite against {mu.label} near t = 1")
        piece = float(np.sum(w * vals))
        total += piece
        m += 1.0
        quiet = quiet + 1 if piece <= negligible * total else 0
        if quiet >= 3:
            return m, total
    raise IllDefinedError(
        f"int |{f!r}| d{mu.label} does not settle before 1 - t = e^-{_M_MAX:g} "
        f"(last unit panel {piece:.3e} of running total {total:.3e})"
    )


def measure_rule(f: AnalyticFunction, mu: RadialMeasure, n: int = 10, margin: float = 30.0) -> MeasureRule:
    f_depth, _ = integrability_depth(f, mu)
    f_depth = max(f_depth, f.scale + margin)
    t, tc, wts, depth = _density_nodes(mu, n, _M_MAX)
    at = np.array([a for a, _ in mu.atoms], dtype=float)
    am = np.array([m for _, m in mu.atoms], dtype=float)
    return MeasureRule(t, tc, wts, depth, at, am, f_depth, margin)


class _RuleCache:
    """f sampled on the measure nodes, shared by all evaluations."""

    def __init__(self, f, rule: MeasureRule):
        self.rule = rule
        self.fw = f.at(rule.t.astype(complex), rule.tc.astype(complex)) * rule.weights if rule.t.size else None
        self.fa = None
        if rule.atom_t.size:
            self.fa = f.at(rule.atom_t.astype(complex), (1.0 - rule.atom_t).astype(complex)) * rule.atom_mass


def _apply_rule(cache: _RuleCache, z, w, chunk: int = 2048):
    rule = cache.rule
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    wf = np.broadcast_to(np.asarray(w, dtype=complex), shape).ravel()
    # points far from 1 need shallow rules; sort so each chunk takes its own prefix
    order = np.argsort(-np.abs(wf), kind="stable")
    ws = wf[order]
    out = np.empty(wf.size, dtype=complex)
    for i in range(0, ws.size, chunk):
        ww = ws[i:i + chunk, None]
        acc = np.zeros(ww.shape[0], dtype=complex)
        if cache.fw is not None:
            k = rule.prefix(float(np.abs(ww[-1, 0])))
            # 1 - t z = (1 - t) + t (1 - z)
            acc += (rule.tc[None, :k] + rule.t[None, :k] * ww) ** -1 @ cache.fw[:k]
        if cache.fa is not None:
            den = (1.0 - rule.atom_t)[None, :] + rule.atom_t[None, :] * ww
            acc += (den**-1) @ cache.fa
        out[order[i:i + chunk]] = acc
    return out.reshape(shape)


def imu_apply(f: AnalyticFunction, mu: RadialMeasure, z, cfg: QuadratureConfig | None = None, w=None):
    """I_mu(f)(z) = int_0^1 f(t) / (1 - t z) dmu(t).

    Accepts scalar or array z (|z| < 1). ``w`` may supply 1 - z
    accurately. Two Gauss orders are compared; the call fails if they
    disagree beyond the tolerance after escalation.
    """
    cfg = cfg or QuadratureConfig()
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1):
        raise DomainError("imu_apply needs |z| < 1")
    w = 1.0 - z if w is None else np.asarray(w, dtype=complex)
    prev = None
    for n in (10, 14, 20, 28):
        val = _apply_rule(_RuleCache(f, measure_rule(f, mu, n)), z, w)
        if prev is not None:
            err = np.abs(val - prev)
            if np.all(err <= np.maximum(cfg.rel_tol * np.abs(val), cfg.abs_tol)):
                return val[()] if val.ndim == 0 else val
        prev = val
    raise NonConvergenceError(f"kernel integral of {f!r} did not settle (max change {float(np.max(err)):.3e})")


class IntegralImage(AnalyticFunction):
    """z -> I_mu(f)(z) as an analytic function, with a fixed measure rule.

    The rule is built for points down to distance ``w_floor`` from 1;
    closer points still evaluate, with graded nodes reaching 1 - t = e^-690.
    """

    anchors = (0.0,)

    def __init__(self, f: AnalyticFunction, mu: RadialMeasure, n: int = 8, margin: float = 25.0):
        self.f = f
        self.mu = mu
        self.scale = f.scale
        self.label = f"I[{mu.label}]({f.label})"
        self._cache = _RuleCache(f, measure_rule(f, mu, n, margin))
        if mu.density is None:
            self.anchors = ()
            self.smooth = True

    def at(self, z, w):
        return _apply_rule(self._cache, z, w)


def hilbert_image(f: AnalyticFunction, n: int = 8) -> IntegralImage:
    return IntegralImage(f, lebesgue(), n)


def hilbert_via_composition(f: AnalyticFunction, z, cfg: QuadratureConfig | None = None):
    """int_0^1 omega_s(z) f(phi_s(z)) ds with phi_s(z) = s/((s-1)z+1),
    omega_s(z) = 1/((s-1)z+1)."""
    cfg = cfg or QuadratureConfig()
    integrability_depth(f, lebesgue())
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(np.abs(z) >= 1):
        raise DomainError("hilbert_via_composition needs |z| < 1")
    w = 1.0 - z

    def g(s, sc):
        s = s[:, None]
        sc = sc[:, None]
        den = s + sc * w[None, :]  # (s - 1) z + 1
        phi = s / den
        one_minus_phi = sc * w[None, :] / den
        return f.at(phi, one_minus_phi) / den

    val = integrate_01(g, cfg, complement=True).value
    val = np.asarray(val)
    return val[0] if val.size == 1 else val


def phi_kernel(alpha: float, z, cfg: QuadratureConfig | None = None):
    """Phi_alpha(z) = int_1^inf dw / (w (w - z)^{1 - alpha}), via w = 1/u."""
    if not 0 < alpha < 1:
        raise DomainError("phi_kernel needs 0 < alpha < 1")
    cfg = cfg or QuadratureConfig()
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(np.abs(z) > 1) or np.any(z == 1):
        raise DomainError("phi_kernel is evaluated on the closed disc minus z = 1; use phi_kernel_at_one")
    w = 1.0 - z

    def g(u, uc):
        u = u[:, None]
        uc = uc[:, None]
        return u ** (-alpha) * (uc + u * w[None, :]) ** (alpha - 1.0)

    val = np.asarray(integrate_01(g, cfg, complement=True).value)
    return val[0] if val.size == 1 else val


def phi_kernel_at_one(alpha: float) -> float:
    """Phi_alpha(1) = B(alpha, 1 - alpha) = pi / sin(pi alpha)."""
    if not 0 < alpha < 1:
        raise DomainError("phi_kernel needs 0 < alpha < 1")
    return beta_fn(alpha, 1.0 - alpha)


def partial_sum_bound_check(f: PowerSeries, tp: TentParams, n_max: int, cfg: QuadratureConfig | None = None):
    """(sup_{n <= n_max} |sum_k a_k/(n+k+1)|, that sup over rho_pq(f))."""
    if not tp.strict_regime:
        raise DomainError("partial sum bound check requires 1/p + 1/q < 1")
    b = hilbert_apply(f, n_max).coeffs
    sup = float(np.max(np.abs(b)))
    norm = rho_pq(SeriesBacked(f), tp, cfg or QuadratureConfig(rel_tol=1e-8))
    return sup, sup / norm.finite
