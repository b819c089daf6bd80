"""Log-gamma and Beta via a Lanczos approximation (g = 671/128, 14 terms)."""
from __future__ import annotations

import math

_LANCZOS = (
    57.1562356658629235,
    -59.5979603554754912,
    14.1360979747417471,
    -0.491913816097620199,
    0.339946499848118887e-4,
    0.465236289270485756e-4,
    -0.983744753048795646e-4,
    0.158088703224912494e-3,
    -0.210264441724104883e-3,
    0.217439618115212643e-3,
    -0.164318106536763890e-3,
    0.844182239838527433e-4,
    -0.261908384015814087e-4,
    0.368991826595316234e-5,
)
_G_SHIFT = 671.0 / 128.0
_SQRT_2PI = 2.5066282746310005


def lgamma(x: float) -> float:
    """log|Gamma(x)| for real x that is not a nonpositive integer."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise ValueError(f"log-gamma pole at {x}")
    if x < 0.5:
        # reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return math.log(math.pi / abs(math.sin(math.pi * x))) - lgamma(1.0 - x)
    tmp = x + _G_SHIFT
    tmp = (x + 0.5) * math.log(tmp) - tmp
    ser = 0.999999999999997092
    y = x
    for c in _LANCZOS:
        y += 1.0
        ser += c / y
    return tmp + math.log(_SQRT_2PI * ser / x)


def gamma_fn(x: float) -> float:
    """Gamma(x) with the sign restored for negative arguments."""
    val = math.exp(lgamma(x))
    if x < 0 and math.floor(x) % 2 == 1:
        val = -val
    return val


def beta_fn(x: float, y: float) -> float:
    """B(x, y) = Gamma(x) Gamma(y) / Gamma(x + y) for x, y > 0."""
    if not (x > 0 and y > 0):
        raise ValueError(f"beta_fn needs positive arguments, got ({x}, {y})")
    return math.exp(lgamma(x) + lgamma(y) - lgamma(x + y))
