"""Experiments on the Hilbert operator: norm bounds, norm probes along
test families, boundedness and compactness signatures, and classical
coefficient inequalities."""
from __future__ import annotations

import math
import os

import numpy as np

from .core.functions import (
    AnalyticFunction,
    BoundaryPower,
    CauchyKernel,
    Composed,
    Constant,
    LogTest,
    RationalKernel,
    Scaled,
    SeriesBacked,
    kernel_test_family,
    polynomial,
)
from .core.quadrature import QuadratureConfig, integrate_01
from .core.series import DomainError, PowerSeries
from .core.special import beta_fn
from .hilbert import IllDefinedError, IntegralImage, hilbert_apply
from .measures import RadialMeasure, lebesgue
from .results import ProbeResult
from .tent import TentParams, bergman_norm, dyadic_boxes, rho_pq, tent_p_infty_norm

DEFAULT_SEED = 0xC0FFEE
EXPERIMENT_CFG = QuadratureConfig(rel_tol=1e-6)


def corpus_seed() -> int:
    raw = os.environ.get("TENTOP_SEED")
    if raw is None or raw.strip() == "":
        return DEFAULT_SEED
    return int(raw, 0)


def default_alpha_grid():
    """alpha_j = 1 - 10^{-j/2}, j = 0..10."""
    return [1.0 - 10.0 ** (-j / 2.0) for j in range(11)]


# ---- bounds --------------------------------------------------------------------

def _bound_integrals(tp: TentParams, cfg: QuadratureConfig):
    # Both integrands have endpoint singularities close to 1/t or 1/(1 - t) near
    # the edges of the admissible range. Split at 1/2 and remove each singularity
    # with a power substitution so the quadrature only sees bounded integrands.
    s, q = tp.s, tp.q

    def beta_like(a: float):
        # int_0^1 t^(a-1) (1-t)^(-s) dt
        la, lb = 0.5**a, 0.5 ** (1.0 - s)

        def left(x, xc):
            t = (la * x) ** (1.0 / a)
            return la / a * (1.0 - t) ** (-s)

        def right(x, xc):
            tc = (lb * x) ** (1.0 / (1.0 - s))
            return lb / (1.0 - s) * (1.0 - tc) ** (a - 1.0)

        lp = integrate_01(left, cfg, complement=True)
        rp = integrate_01(right, cfg, complement=True)
        return float(lp.value + rp.value), lp.error + rp.error

    lo, e1 = beta_like(s)
    hi, e2 = beta_like(1.0 / q)
    return lo, hi, max(e1, e2)


def norm_bounds(tp: TentParams, check_tol: float = 1e-8):
    """(B(s, 1 - s), B(1/q, 1 - s)) with s = 1/p + 1/q, cross-checked by quadrature."""
    if not tp.strict_regime or not tp.p > 2:
        raise DomainError(f"norm bounds require 1/p+1/q < 1 and p > 2 (got {tp}, 1/p+1/q = {tp.s:.6g})")
    lower = beta_fn(tp.s, 1.0 - tp.s)
    upper = beta_fn(1.0 / tp.q, 1.0 - tp.s)
    qlo, qhi, _ = _bound_integrals(tp, QuadratureConfig(rel_tol=1e-12, abs_tol=1e-14))
    if abs(qlo - lower) > check_tol * max(1.0, lower) or abs(qhi - upper) > check_tol * max(1.0, upper):
        raise ArithmeticError(f"Beta values disagree with quadrature: {lower} vs {qlo}, {upper} vs {qhi}")
    return lower, upper


def bound_integrals(tp: TentParams):
    """Direct quadrature of the two bound integrals (lower, upper, error)."""
    return _bound_integrals(tp, QuadratureConfig(rel_tol=1e-12, abs_tol=1e-14))


# ---- the matrix engine ---------------------------------------------------------

class MatrixImage(AnalyticFunction):
    """The Hilbert matrix applied to the Taylor coefficients of f.

    Inside |z| <= 0.9 the image series sum_n b_n z^n is summed with
    b = hilbert_apply(a). Outside, the image is sum_k a_k C_k(z), where the
    matrix column C_k(z) = sum_n z^n/(n+k+1) obeys C_0 = -log(1-z)/z and
    C_{k+1} = (C_k - 1/(k+1))/z. The forward recursion amplifies rounding
    by |z|^-k, which the decay of a_k absorbs as long as |a_k| |z|^-k
    stays bounded; hence the limit on the kernel parameter.
    """

    anchors = (0.0,)
    inner_radius = 0.9

    def __init__(self, coeffs, label="matrix-image"):
        a = np.asarray(coeffs, dtype=complex)
        self.a = a
        n_out = int(math.ceil(math.log(1e-18) / math.log(self.inner_radius))) + 8
        self.b = hilbert_apply(PowerSeries.polynomial(a), n_out).coeffs
        self.label = label

    def at(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        out = np.empty(z.shape, dtype=complex)
        inner = np.abs(z) <= self.inner_radius
        zi = z[inner]
        acc = np.zeros_like(zi)
        for c in self.b[::-1]:
            acc = acc * zi + c
        out[inner] = acc
        zo, wo = z[~inner], w[~inner]
        col = -np.log(wo) / zo
        acc = self.a[0] * col
        for k in range(1, self.a.size):
            col = (col - 1.0 / k) / zo
            acc = acc + self.a[k] * col
        out[~inner] = acc
        return out


def kernel_family_coefficients(alpha: float, tp: TentParams, tol: float = 1e-18):
    """Taylor coefficients of the boundedness test family, cut where they fall below tol."""
    c = (1.0 - alpha) ** (1.0 / tp.p_conj + 1.0 / tp.q_conj)
    if alpha == 0:
        return np.array([c], dtype=complex)
    n = int(math.ceil(math.log(tol) / math.log(alpha))) + 64
    k = np.arange(n)
    return c * (k + 1.0) * alpha**k


MATRIX_ALPHA_LIMIT = 0.95


def image_of(f: AnalyticFunction, mu: RadialMeasure | None = None) -> AnalyticFunction:
    return IntegralImage(f, mu or lebesgue())


def operator_norm_probe(tp: TentParams, alpha_grid=None, engine: str = "integral", cfg: QuadratureConfig | None = None) -> ProbeResult:
    """Ratios rho(H f_a)/rho(f_a) along the kernel test family."""
    if not tp.strict_regime or not tp.p > 2:
        raise DomainError(f"operator norm probe requires 1/p+1/q < 1 and p > 2 (got {tp})")
    if engine not in ("integral", "matrix"):
        raise ValueError(f"unknown engine {engine!r}")
    cfg = cfg or EXPERIMENT_CFG
    grid = list(alpha_grid) if alpha_grid is not None else default_alpha_grid()
    if any(not (0 <= a <= 1 - 1e-5) for a in grid):
        raise DomainError("alpha grid must lie in [0, 1 - 1e-5]")
    lower, upper = norm_bounds(tp)
    ratios, errors = [], []
    for a in grid:
        f = kernel_test_family(a, tp)
        if engine == "integral":
            img = image_of(f)
        elif a > MATRIX_ALPHA_LIMIT:
            ratios.append(math.nan)
            errors.append(f"matrix engine limited to alpha <= {MATRIX_ALPHA_LIMIT}")
            continue
        else:
            img = MatrixImage(kernel_family_coefficients(a, tp))
        nf = rho_pq(f, tp, cfg)
        ni = rho_pq(img, tp, cfg)
        if nf.diverges or ni.diverges:
            ratios.append(math.inf)
            errors.append("norm diverges")
            continue
        ratios.append(ni.finite / nf.finite)
        errors.append(max(nf.error_estimate / nf.finite, ni.error_estimate / max(ni.finite, 1e-300)))
    finite = [r for r in ratios if math.isfinite(r)]
    violations = tuple(a for a, r in zip(grid, ratios) if not (r <= upper * 1.05) and not math.isnan(r))
    return ProbeResult(
        alpha_grid=tuple(grid),
        ratios=tuple(ratios),
        lower_bound=lower,
        upper_bound=upper,
        max_ratio=max(finite) if finite else math.nan,
        bound_violations=violations,
        engine=engine,
        errors=tuple(errors),
    )


def lower_bound_probe(tp: TentParams, alphas, cfg: QuadratureConfig | None = None) -> ProbeResult:
    """rho(H g_a) for g_a = (1 - z)^-a / rho((1 - z)^-a), a increasing toward 1/p + 1/q."""
    cfg = cfg or EXPERIMENT_CFG
    if not tp.strict_regime:
        raise DomainError(f"lower bound probe requires 1/p+1/q < 1 (got {tp})")
    lower, upper = beta_fn(tp.s, 1.0 - tp.s), beta_fn(1.0 / tp.q, 1.0 - tp.s)
    ratios, errors = [], []
    for a in alphas:
        if not 0 <= a < tp.s:
            raise DomainError(f"exponent {a} outside [0, 1/p+1/q)")
        f = BoundaryPower(a)
        nf = rho_pq(f, tp, cfg)
        ni = rho_pq(image_of(f), tp, cfg)
        if nf.diverges or ni.diverges:
            ratios.append(math.inf)
            errors.append("norm diverges")
            continue
        ratios.append(ni.finite / nf.finite)
        errors.append(max(nf.error_estimate / nf.finite, ni.error_estimate / ni.finite))
    finite = [r for r in ratios if math.isfinite(r)]
    violations = tuple(a for a, r in zip(alphas, ratios) if not r <= 1.05 * upper)
    return ProbeResult(tuple(alphas), tuple(ratios), lower, upper, max(finite) if finite else math.nan, violations, "integral", tuple(errors))


# ---- boundedness and compactness ----------------------------------------------

def random_polynomials(count: int, seed: int | None = None, degree: int = 64):
    """Seeded polynomials of random degree <= ``degree`` with complex Gaussian
    coefficients; the first n of a larger corpus equal the corpus of size n."""
    rng = np.random.default_rng(corpus_seed() if seed is None else seed)
    out = []
    for i in range(count):
        d = int(rng.integers(0, degree + 1))
        c = rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
        out.append(PowerSeries.polynomial(c, index=i))
    return out


def default_corpus(tp: TentParams, seed: int | None = None, n_random: int = 20):
    fam = [(f"f_alpha({a:g})", kernel_test_family(a, tp)) for a in (0.0, 0.5, 0.9, 0.99, 0.999)]
    polys = [(f"poly[{i}]", SeriesBacked(s, f"poly[{i}]")) for i, s in enumerate(random_polynomials(n_random, seed))]
    return fam + polys


def boundedness_experiment(mu: RadialMeasure, tp: TentParams, corpus=None, cfg: QuadratureConfig | None = None):
    """Rows (label, rho(f), rho(I_mu f), ratio) over the corpus.

    Divergent or ill-defined cases are recorded in the row instead of raising.
    """
    if not tp.strict_regime:
        raise DomainError(f"boundedness experiment requires 1/p+1/q < 1 (got {tp})")
    cfg = cfg or EXPERIMENT_CFG
    corpus = corpus if corpus is not None else default_corpus(tp)
    rows = []
    for item in corpus:
        label, f = item if isinstance(item, tuple) else (repr(item), item)
        row = {"function": label, "rho_f": math.nan, "rho_image": math.nan, "ratio": math.nan, "err_estimate": math.nan, "status": "ok"}
        try:
            nf = rho_pq(f, tp, cfg)
            ni = rho_pq(IntegralImage(f, mu), tp, cfg)
        except IllDefinedError as exc:
            row["status"] = f"ill-defined: {exc}"
            rows.append(row)
            continue
        if nf.diverges or ni.diverges:
            row["status"] = "diverges"
            rows.append(row)
            continue
        row["rho_f"] = nf.finite
        row["rho_image"] = ni.finite
        row["ratio"] = ni.finite / nf.finite if nf.finite > 0 else math.nan
        row["err_estimate"] = max(nf.error_estimate, ni.error_estimate)
        rows.append(row)
    return rows


def compactness_probe(mu: RadialMeasure, tp: TentParams, alpha_seq, cfg: QuadratureConfig | None = None, with_errors: bool = False):
    """rho(I_mu g_a) with g_a the kernel test family normalized to rho = 1.

    With ``with_errors`` the entries are (value, error estimate) pairs.
    """
    if not tp.strict_regime:
        raise DomainError(f"compactness probe requires 1/p+1/q < 1 (got {tp})")
    cfg = cfg or EXPERIMENT_CFG
    out = []
    for a in alpha_seq:
        f = kernel_test_family(a, tp)
        nf = rho_pq(f, tp, cfg).finite
        g = Scaled(1.0 / nf, f)
        ni = rho_pq(IntegralImage(g, mu), tp, cfg)
        val = math.inf if ni.diverges else ni.finite
        out.append((val, ni.error_estimate) if with_errors else val)
    return out


# ---- coefficient inequalities ----------------------------------------------------

def hardy_norm(series: PowerSeries, points: int = 8192) -> float:
    """Circle mean of |f| on |z| = 1 for a polynomial."""
    if not series.is_polynomial:
        raise DomainError("boundary values are only available for polynomials")
    theta = 2.0 * math.pi * np.arange(points) / points
    vals = np.polyval(series.coeffs[::-1], np.exp(1j * theta))
    return float(np.mean(np.abs(vals)))


def _weighted_abs_sum(series: PowerSeries) -> float:
    a = np.abs(series.coeffs)
    return math.fsum(a / (np.arange(a.size) + 1.0))


def hardy_inequality_check(corpus) -> float:
    """max over the corpus of (sum |a_k|/(k+1)) / ||f||_{H^1}."""
    best = 0.0
    for s in corpus:
        h = hardy_norm(s)
        if h > 0:
            best = max(best, _weighted_abs_sum(s) / h)
    return best


def bergman_coefficient_check(corpus, p: float, cfg: QuadratureConfig | None = None) -> float:
    """max over the corpus of (sum |a_k|/(k+1)) / ||f||_{A^p}."""
    if not p > 2:
        raise DomainError("Bergman coefficient check requires p > 2")
    cfg = cfg or EXPERIMENT_CFG
    best = 0.0
    for s in corpus:
        n = bergman_norm(SeriesBacked(s), p, cfg).finite
        if n > 0:
            best = max(best, _weighted_abs_sum(s) / n)
    return best


def composition_bound_check(a_grid, p: float, corpus, n_max: int = 6, cfg: QuadratureConfig | None = None) -> float:
    """max of ||f o phi_a||_{T_p^inf} (1 - a)^{1/p} / ||f||_{T_p^inf} with
    phi_a(z) = (a + z)/(1 + a z), sups over dyadic boxes up to level n_max."""
    if not p >= 2:
        raise DomainError("composition bound check requires p >= 2")
    boxes = dyadic_boxes(n_max)
    best = 0.0
    for f in corpus:
        base = tent_p_infty_norm(f, p, boxes, cfg)
        if base.diverges or base.finite == 0:
            continue
        for a in a_grid:
            comp = f if a == 0 else Composed(f, a)
            val = tent_p_infty_norm(comp, p, boxes, cfg)
            if val.diverges:
                return math.inf
            best = max(best, val.finite * (1.0 - a) ** (1.0 / p) / base.finite)
    return best


def critical_line_membership(tp: TentParams, function: AnalyticFunction | None = None, cfg: QuadratureConfig | None = None, grid=None):
    """rho_pq of the logarithmic test function on the line 1/p + 1/q = 1."""
    if not tp.critical_regime or not tp.p > 2:
        raise DomainError(f"critical line membership requires 1/p+1/q = 1 and p > 2 (got {tp}, 1/p+1/q = {tp.s:.15g})")
    return rho_pq(function or LogTest(), tp, cfg or QuadratureConfig(rel_tol=1e-4), grid)


def growth_catalog(tp: TentParams, seed: int | None = None):
    """Members of the tent space used for the growth-profile checks."""
    rng = np.random.default_rng(corpus_seed() if seed is None else seed)
    c = rng.normal(size=9) + 1j * rng.normal(size=9)
    return [
        ("constant", Constant(1.0)),
        ("z^3", polynomial([0, 0, 0, 1], "z^3")),
        ("random_poly", polynomial(c, "random_poly")),
        ("kernel(0.5,1)", RationalKernel(0.5, 1.0)),
        ("kernel(-0.5,2)", RationalKernel(-0.5, 2.0)),
        ("boundary_power(s/4)", BoundaryPower(tp.s / 4.0)),
    ]


__all__ = [
    "CauchyKernel",
    "MatrixImage",
    "boundedness_experiment",
    "bergman_coefficient_check",
    "compactness_probe",
    "composition_bound_check",
    "critical_line_membership",
    "default_alpha_grid",
    "growth_catalog",
    "hardy_inequality_check",
    "lower_bound_probe",
    "norm_bounds",
    "operator_norm_probe",
    "random_polynomials",
]
