"""Positive measures on [0, 1): tails, moments, dyadic blocks, Carleson
classification and the dyadic polar lattice."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core.quadrature import QuadratureConfig, integrate_01
from .tent import TentParams

_TAIL_IDENTITY_FROM = 1000
_CM_CEILING = 1e6
_VCM_FRACTION = 1e-3


@dataclass(frozen=True, eq=False)
class RadialMeasure:
    """density(t, 1 - t) dt plus point masses.

    ``density`` takes the node and its complement so densities singular at
    t = 1 can be evaluated accurately. ``symbolic_tail(t, 1 - t)`` gives
    the density part of mu([t, 1)) in closed form when known.
    """

    density: Callable | None = None
    atoms: tuple = ()
    symbolic_tail: Callable | None = None
    label: str = "mu"
    total_mass: float = field(default=float("nan"), compare=False)

    def __post_init__(self):
        atoms = tuple((float(t), float(m)) for t, m in self.atoms)
        for t, m in atoms:
            if not (0.0 <= t < 1.0):
                raise ValueError(f"atom location {t} outside [0, 1)")
            if not m > 0:
                raise ValueError(f"atom mass {m} must be positive")
        object.__setattr__(self, "atoms", atoms)
        mass = sum(m for _, m in atoms)
        if self.density is not None:
            res = integrate_01(self.density, QuadratureConfig(rel_tol=1e-10, abs_tol=1e-14), complement=True)
            dens = float(np.real(res.value))
            if not math.isfinite(dens) or dens < 0:
                raise ValueError(f"density of {self.label} does not have finite nonnegative mass")
            mass += dens
        object.__setattr__(self, "total_mass", mass)

    def __add__(self, other: "RadialMeasure") -> "RadialMeasure":
        return combine([self, other])

    def scaled(self, c: float) -> "RadialMeasure":
        if not c > 0:
            raise ValueError("measures scale by positive constants only")
        dens = tail = None
        if self.density is not None:
            base = self.density

            def dens(t, tc):
                return c * base(t, tc)

        if self.symbolic_tail is not None:
            st = self.symbolic_tail

            def tail(t, tc):
                return c * st(t, tc)

        return RadialMeasure(dens, tuple((t, c * m) for t, m in self.atoms), tail, f"{c:g}*{self.label}")

    def tail(self, t: float, tc: float | None = None) -> float:
        return tail(self, t, tc)


def combine(parts) -> RadialMeasure:
    parts = list(parts)
    dens_parts = [m.density for m in parts if m.density is not None]
    symbolic = all(m.symbolic_tail is not None for m in parts if m.density is not None)
    dens = tail = None
    if dens_parts:
        def dens(t, tc):
            return sum(d(t, tc) for d in dens_parts)

        if symbolic:
            tails = [m.symbolic_tail for m in parts if m.density is not None]

            def tail(t, tc):
                return sum(g(t, tc) for g in tails)

    atoms = tuple(a for m in parts for a in m.atoms)
    return RadialMeasure(dens, atoms, tail, "+".join(m.label for m in parts))


# ---- catalog -----------------------------------------------------------------

def lebesgue() -> RadialMeasure:
    return RadialMeasure(lambda t, tc: np.ones_like(t), (), lambda t, tc: tc, "lebesgue")


def power_weight(gamma: float) -> RadialMeasure:
    """(1 - t)^gamma dt, gamma > -1."""
    if not gamma > -1:
        raise ValueError("(1-t)^gamma dt has finite mass only for gamma > -1")
    g = float(gamma)
    return RadialMeasure(lambda t, tc: tc**g, (), lambda t, tc: tc ** (g + 1.0) / (g + 1.0), f"pow:{g:g}")


def log_weight() -> RadialMeasure:
    """log(1/(1 - t)) dt."""
    return RadialMeasure(
        lambda t, tc: -np.log(tc),
        (),
        lambda t, tc: tc * (1.0 - np.log(tc)),
        "logweight",
    )


def atom(t: float, mass: float = 1.0) -> RadialMeasure:
    return RadialMeasure(None, ((t, mass),), None, f"atom:{t:g}:{mass:g}")


def zero_measure() -> RadialMeasure:
    return RadialMeasure(None, (), None, "zero")


def parse_measure(key: str) -> RadialMeasure:
    """Catalog lookup: lebesgue, pow:g, logweight, atom:t:m, zero, joined by '+'."""
    parts = [k.strip() for k in key.split("+") if k.strip()]
    if not parts:
        raise ValueError("empty measure key")
    built = []
    for k in parts:
        head, *args = k.split(":")
        try:
            if head == "lebesgue" and not args:
                built.append(lebesgue())
            elif head == "pow" and len(args) == 1:
                built.append(power_weight(float(args[0])))
            elif head == "logweight" and not args:
                built.append(log_weight())
            elif head == "atom" and len(args) in (1, 2):
                built.append(atom(float(args[0]), float(args[1]) if len(args) == 2 else 1.0))
            elif head == "zero" and not args:
                built.append(zero_measure())
            else:
                raise ValueError
        except ValueError as exc:
            raise ValueError(f"unrecognized measure key {k!r}") from exc
    if len(built) == 1:
        m = built[0]
    else:
        m = combine(built)
    return RadialMeasure(m.density, m.atoms, m.symbolic_tail, key)


CATALOG_KEYS = ("lebesgue", "pow:-0.5", "pow:0", "pow:1", "logweight", "atom:0:1", "atom:0.5:1")


# ---- tails and moments -------------------------------------------------------

def tail(mu: RadialMeasure, t: float, tc: float | None = None, cfg: QuadratureConfig | None = None) -> float:
    """mu([t, 1)); ``tc`` may pass 1 - t exactly when t is close to 1."""
    if tc is None:
        tc = 1.0 - t
    if not (0.0 <= t < 1.0) or not tc > 0:
        raise ValueError("tail needs 0 <= t < 1")
    total = sum(m for s, m in mu.atoms if s >= t)
    if mu.density is None:
        return total
    if mu.symbolic_tail is not None:
        return total + float(mu.symbolic_tail(np.float64(t), np.float64(tc)))
    cfg = cfg or QuadratureConfig(rel_tol=1e-11, abs_tol=1e-300)

    # s in (0,1) -> t + tc*s, complement tc*(1-s)
    def g(s, sc):
        return tc * mu.density(t + tc * s, tc * sc)

    return total + float(np.real(integrate_01(g, cfg, complement=True).value))


def moment(mu: RadialMeasure, n: int, cfg: QuadratureConfig | None = None) -> float:
    """mu_n = int t^n dmu(t)."""
    if n < 0:
        raise ValueError("moment order must be nonnegative")
    atoms = sum(m * t**n for t, m in mu.atoms)
    if mu.density is None:
        return atoms
    cfg = cfg or QuadratureConfig(rel_tol=1e-12, abs_tol=1e-300)
    if n > _TAIL_IDENTITY_FROM and mu.symbolic_tail is not None:
        # mu_n = n int_0^1 t^{n-1} mu([t,1)) dt for the density part
        st = mu.symbolic_tail

        def g(t, tc):
            pw = np.where(tc < 0.5, np.exp((n - 1) * np.log1p(-np.minimum(tc, 0.5))), t ** (n - 1))
            return n * pw * st(t, tc)

        return atoms + float(np.real(integrate_01(g, cfg, complement=True).value))

    def h(t, tc):
        pw = np.where(tc < 0.5, np.exp(n * np.log1p(-np.minimum(tc, 0.5))), t**n)
        return pw * mu.density(t, tc)

    return atoms + float(np.real(integrate_01(h, cfg, complement=True).value))


def block_mass(mu: RadialMeasure, n: int) -> float:
    """mu([1 - 2^-n, 1 - 2^-(n+1))); an atom counts wholly in its block."""
    a_c = 2.0**-n
    b_c = 2.0 ** -(n + 1)
    return max(0.0, tail(mu, 1.0 - a_c, a_c) - tail(mu, 1.0 - b_c, b_c))


# ---- Carleson classification --------------------------------------------------

@dataclass(frozen=True)
class ProbeSpec:
    depth: int = 40
    trend_window: int = 10
    moment_n_max: int = 10_000
    moment_samples: int = 41


@dataclass(frozen=True)
class CarlesonReport:
    is_1CM: bool
    cm_constant: float
    is_1VCM: bool
    vanishing_profile: tuple
    moment_growth: float
    moment_profile: tuple
    dyadic_condition_value: float | str
    dyadic_last_term_ratio: float
    verdict: str
    probe_resolution: str

    def as_dict(self) -> dict:
        return {
            "is_1CM": self.is_1CM,
            "cm_constant": self.cm_constant,
            "is_1VCM": self.is_1VCM,
            "moment_growth": self.moment_growth,
            "dyadic_condition_value": self.dyadic_condition_value,
            "dyadic_last_term_ratio": self.dyadic_last_term_ratio,
            "verdict": self.verdict,
            "probe_resolution": self.probe_resolution,
        }


def tail_ratio_profile(mu: RadialMeasure, depth: int = 40):
    """(t, mu([t,1)) / (1 - t)) at t = 1 - 2^-m, m = 0..depth."""
    out = []
    for m in range(depth + 1):
        tc = 2.0**-m
        out.append((1.0 - tc, tail(mu, 1.0 - tc, tc) / tc))
    return out


def moment_profile(mu: RadialMeasure, n_max: int = 10_000, samples: int = 41):
    """(n, (n+1) mu_n) on a logarithmic grid of orders up to n_max."""
    ns = np.unique(np.round(np.geomspace(1, n_max, samples)).astype(int))
    ns = np.concatenate([[0], ns])
    return [(int(n), (n + 1) * moment(mu, int(n))) for n in ns]


def moments_bounded(profile, growth_tol: float = 0.05) -> bool:
    """Bounded-growth test on (n, (n+1) mu_n): less than 5% rise over the last decade."""
    ns = np.array([n for n, _ in profile], dtype=float)
    vals = np.array([v for _, v in profile])
    last = ns[-1]
    ref = vals[ns <= last / 10.0]
    if ref.size == 0:
        return True
    return bool(vals[-1] <= ref[-1] * (1.0 + growth_tol) + 1e-300)


def dyadic_condition(mu: RadialMeasure, tp: TentParams, depth: int = 40):
    """Partial sums of sum_n [mu(block n) 2^{n s}]^{q'} for n <= depth.

    Returns (partial sums, last-term / partial-sum ratio).
    """
    s, qc = tp.s, tp.q_conj
    terms = []
    for n in range(depth + 1):
        terms.append((block_mass(mu, n) * 2.0 ** (n * s)) ** qc)
    sums = np.cumsum(terms)
    ratio = terms[-1] / sums[-1] if sums[-1] > 0 else 0.0
    return sums, float(ratio)


def classify_carleson(mu: RadialMeasure, tp: TentParams, probe: ProbeSpec | None = None) -> CarlesonReport:
    probe = probe or ProbeSpec()
    prof = tail_ratio_profile(mu, probe.depth)
    ratios = np.array([r for _, r in prof])
    cm_constant = float(ratios.max())
    window = ratios[-probe.trend_window:]
    scale = max(cm_constant, 1e-300)
    steps = np.diff(window)
    rising = bool(np.any(steps > 1e-9 * scale))
    falling = bool(np.any(steps < -1e-9 * scale))
    slope = float(np.polyfit(np.arange(window.size), window, 1)[0]) if window.size > 1 else 0.0
    if cm_constant == 0:
        verdict = "1-VCM"
        is_cm, is_vcm = True, True
    elif cm_constant > _CM_CEILING or (rising and not falling):
        verdict = "not 1-CM"
        is_cm, is_vcm = False, False
    elif rising and falling and slope > 1e-9 * scale:
        verdict = "inconclusive"
        is_cm, is_vcm = False, False
    else:
        is_cm = True
        is_vcm = bool(ratios[-1] <= _VCM_FRACTION * cm_constant)
        verdict = "1-VCM" if is_vcm else "1-CM"
    mprof = moment_profile(mu, probe.moment_n_max, probe.moment_samples)
    growth = float(max(v for _, v in mprof))
    sums, last_ratio = dyadic_condition(mu, tp, probe.depth)
    dyadic_value: float | str = float(sums[-1])
    if not math.isfinite(dyadic_value) or (last_ratio > 1e-6 and sums[-1] > sums[-2] * (1 + 1e-3)):
        dyadic_value = "diverges"
    resolution = (
        f"tail ratios at t = 1 - 2^-m, m = 0..{probe.depth}; trend over last {probe.trend_window}; "
        f"moments at {len(mprof)} orders up to n = {probe.moment_n_max}; dyadic sum to n = {probe.depth}"
    )
    return CarlesonReport(
        is_1CM=is_cm,
        cm_constant=cm_constant,
        is_1VCM=is_vcm,
        vanishing_profile=tuple(prof),
        moment_growth=growth,
        moment_profile=tuple(mprof),
        dyadic_condition_value=dyadic_value,
        dyadic_last_term_ratio=last_ratio,
        verdict=verdict,
        probe_resolution=resolution,
    )


# ---- dyadic polar lattice ------------------------------------------------------

@dataclass(frozen=True)
class LatticeRegion:
    n: int
    j: int
    r_lo: float
    r_hi: float
    theta_lo: float
    theta_hi: float

    @property
    def center(self) -> complex:
        r = 0.5 * (self.r_lo + self.r_hi)
        th = 0.5 * (self.theta_lo + self.theta_hi)
        return r * complex(math.cos(th), math.sin(th))

    def contains(self, z: complex) -> bool:
        rad = abs(z)
        ang = math.atan2(z.imag, z.real) % (2 * math.pi)
        return self.r_lo <= rad < self.r_hi and self.theta_lo <= ang < self.theta_hi


@dataclass(frozen=True)
class LueckingLattice:
    regions: tuple
    centers: np.ndarray

    def level(self, n: int):
        return [r for r in self.regions if r.n == n]


def build_lattice(n_max: int) -> LueckingLattice:
    """Regions 1 - 2^-n <= |z| < 1 - 2^-(n+1), arg in [2 pi j/2^n, 2 pi (j+1)/2^n).

    Centers are the radial and angular midpoints; for n = 0 that is the
    point of modulus 1/4 at angle pi.
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    regions = []
    for n in range(n_max + 1):
        r_lo, r_hi = 1.0 - 2.0**-n, 1.0 - 2.0 ** -(n + 1)
        width = 2 * math.pi / 2**n
        for j in range(2**n):
            regions.append(LatticeRegion(n, j, r_lo, r_hi, j * width, (j + 1) * width))
    centers = np.array([r.center for r in regions])
    return LueckingLattice(tuple(regions), centers)
