from .functions import (
    AnalyticFunction,
    BoundaryPower,
    CauchyKernel,
    Composed,
    Constant,
    LogTest,
    Product,
    RationalKernel,
    Scaled,
    SeriesBacked,
    Sum,
    automorphism,
    kernel_test_family,
    monomial,
    polynomial,
)
from .quadrature import (
    DOUBLE_EXPONENTIAL,
    PLAIN,
    NonConvergenceError,
    QuadratureConfig,
    QuadResult,
    composite_gauss,
    gauss_legendre,
    integrate_01,
)
from .series import DomainError, PowerSeries, cauchy_product, series_eval, taylor_coefficients
from .special import beta_fn, gamma_fn, lgamma
