"""Central numeric tolerances shared by every solver in the package.

Keeping one frozen record avoids the usual drift where each module invents
its own epsilon. Callers that need custom tolerances pass their own
instance; everything else uses DEFAULT_TOLS.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Numeric thresholds used across linear algebra and optimization.

    Attributes:
        feasibility: slack below which a constraint counts as satisfied.
        optimality: reduced-cost / gradient threshold for declaring optimality.
        gap: absolute bound gap for branch-and-bound incumbents.
        tie: relative threshold for treating two objective values as tied.
        degenerate: vector norm below which a cut or direction is zero.
    """

    feasibility: float = 1e-9
    optimality: float = 1e-8
    gap: float = 1e-7
    tie: float = 1e-9
    degenerate: float = 1e-12


DEFAULT_TOLS = Tolerances()
