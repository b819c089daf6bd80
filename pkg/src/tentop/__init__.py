"""Numerical experiments with the Hilbert operator on analytic tent spaces."""
from __future__ import annotations

__version__ = "0.1.0"

from .core import *  # noqa: F401,F403
from .results import DIVERGES, NormEstimate, ProbeResult
from .tent import (
    CarlesonBox,
    RadialGrid,
    TentParams,
    bergman_norm,
    dyadic_boxes,
    growth_profile,
    rho_pq,
    sequence_tent_norm,
    tent_p_infty_norm,
)
from .measures import (
    CarlesonReport,
    RadialMeasure,
    build_lattice,
    classify_carleson,
    lebesgue,
    moment,
    parse_measure,
    tail,
)
from .hilbert import (
    HankelMoments,
    IllDefinedError,
    IntegralImage,
    OrderError,
    hilbert_apply,
    hilbert_via_composition,
    hmu_apply,
    imu_apply,
    phi_kernel,
    partial_sum_bound_check,
)
from .lab import (
    boundedness_experiment,
    bergman_coefficient_check,
    compactness_probe,
    composition_bound_check,
    critical_line_membership,
    hardy_inequality_check,
    norm_bounds,
    operator_norm_probe,
)
