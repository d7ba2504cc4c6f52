"""Approximation ratio of an output against the true geometric median."""

from dataclasses import dataclass
from enum import Enum

from numpy.typing import ArrayLike

from core.vector import TAU, euclidean_distance
from geometry.covering_ball import CoveringBall


class RatioKind(str, Enum):
    FINITE = "finite"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class ApproximationRatio:
    kind: RatioKind
    value: float = 0.0

    @property
    def unbounded(self) -> bool:
        return self.kind is RatioKind.UNBOUNDED

    def within(self, bound: float) -> bool:
        return not self.unbounded and self.value <= bound

    def __str__(self) -> str:
        return RatioKind.UNBOUNDED.value if self.unbounded else f"{self.value:.17g}"


UNBOUNDED = ApproximationRatio(RatioKind.UNBOUNDED)


def approximation_ratio(output: ArrayLike, true_geo: ArrayLike, ball: CoveringBall,
                        tol: float = TAU) -> ApproximationRatio:
    """Distance to the true median in units of the covering-ball radius."""
    distance = euclidean_distance(output, true_geo)
    if ball.radius < tol:
        if distance < tol:
            return ApproximationRatio(RatioKind.FINITE, 0.0)
        return UNBOUNDED
    return ApproximationRatio(RatioKind.FINITE, distance / ball.radius)
