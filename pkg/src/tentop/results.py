"""Result records shared by the norm and experiment modules."""
from __future__ import annotations

from dataclasses import dataclass, field

DIVERGES = "diverges"


@dataclass(frozen=True)
class NormEstimate:
    """A norm value with its error estimate and refinement history.

    ``value`` is a float or the string "diverges". ``refinement_trace``
    holds (level, value) pairs; for a divergent estimate the trace keeps
    the growing truncated values that exhibit the divergence.
    """

    value: float | str
    error_estimate: float
    refinement_trace: tuple
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.refinement_trace:
            raise ValueError("refinement trace must not be empty")

    @property
    def diverges(self) -> bool:
        return self.value == DIVERGES

    @property
    def finite(self) -> float:
        """The numeric value; raises for a divergent estimate."""
        if self.diverges:
            raise ValueError("norm estimate diverges")
        return float(self.value)


@dataclass(frozen=True)
class ProbeResult:
    alpha_grid: tuple
    ratios: tuple
    lower_bound: float
    upper_bound: float
    max_ratio: float
    bound_violations: tuple
    engine: str = "integral"
    errors: tuple = ()
    labels: tuple = ()
