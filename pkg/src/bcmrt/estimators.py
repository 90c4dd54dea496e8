"""Consistent estimation of the cross-type probability q.

The collision count Z (time steps at which both arriving nodes picked the
same parent) has expectation ~ 2q(1-q) log n, so Z / (2 log n) estimates
q(1-q) and inverting x -> x(1-x) on [0, 1/2] estimates q itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import ParameterError
from .stats import collision_count


class Regime(str, Enum):
    INTERIOR = "interior"
    BOUNDARY_ZERO = "boundary_zero"
    BOUNDARY_HALF = "boundary_half"


@dataclass(frozen=True)
class EstimateReport:
    """Point estimate plus its asymptotic error scale.

    ``scale`` is the asymptotic standard deviation at the estimate,
    sqrt(q(1-q) / (2 log n)) / (1 - 2q); it degenerates to 0 at the lower
    boundary (the estimator is a point mass there) and is reported as inf at
    q = 1/2 where the limit law changes.
    """

    q_hat: float
    z: int
    scale: float
    regime: Regime


def phi(x: float) -> float:
    """Inverse of q -> q(1-q) on [0, 1/2], extended by 1/2 for x >= 1/4."""
    if x < 0:
        raise ParameterError(f"phi needs a nonnegative argument, got {x}")
    return 0.5 * (1.0 - math.sqrt(max(1.0 - 4.0 * x, 0.0)))


def estimate_q(tree) -> EstimateReport:
    """Estimate q from a tree observed with time labels.  Needs n >= 2."""
    n = tree.n
    if n < 2:
        raise ParameterError("estimation needs at least two time steps")
    z = collision_count(tree)
    x = z / (2.0 * math.log(n))
    q_hat = phi(x)
    if x >= 0.25:
        regime = Regime.BOUNDARY_HALF
        scale = math.inf
    elif z == 0:
        regime = Regime.BOUNDARY_ZERO
        scale = 0.0
    else:
        regime = Regime.INTERIOR
        scale = math.sqrt(q_hat * (1.0 - q_hat) / (2.0 * math.log(n))) / (
            1.0 - 2.0 * q_hat
        )
    return EstimateReport(q_hat=q_hat, z=z, scale=scale, regime=regime)
