"""Exact minimum covering ball (Welzl with move-to-front)."""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from core.errors import CapacityError
from core.vector import TAU, Vector, VectorSet, as_vector, stack

MAX_WELZL_DIM = 10

_Ball = Optional[Tuple[np.ndarray, float]]


@dataclass(frozen=True)
class CoveringBall:
    center: Vector
    radius: float

    def contains(self, p, tol: float = TAU) -> bool:
        return bool(np.linalg.norm(np.asarray(p, dtype=np.float64) - self.center) <= self.radius + tol)


def _circumball(support: List[np.ndarray]) -> _Ball:
    """Smallest ball with every support point on its boundary."""
    if not support:
        return None
    origin = support[0]
    if len(support) == 1:
        return origin.copy(), 0.0
    edges = np.array(support[1:]) - origin
    gram = 2.0 * edges @ edges.T
    rhs = (edges * edges).sum(axis=1)
    coeffs = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    center = origin + coeffs @ edges
    radius = max(float(np.linalg.norm(center - s)) for s in support)
    return center, radius


def _inside(ball: _Ball, p: np.ndarray) -> bool:
    if ball is None:
        return False
    center, radius = ball
    return float(np.linalg.norm(p - center)) <= radius * (1 + 1e-12) + TAU


def _move_to_front(points: List[np.ndarray], end: int, support: List[np.ndarray], dim: int) -> _Ball:
    ball = _circumball(support)
    if len(support) == dim + 1:
        return ball
    i = 0
    while i < end:
        p = points[i]
        if not _inside(ball, p):
            ball = _move_to_front(points, i, support + [p], dim)
            points.insert(0, points.pop(i))
        i += 1
    return ball


def min_covering_ball(pts: VectorSet, seed: int = 0) -> CoveringBall:
    """Smallest ball enclosing every point (d <= 10)."""
    points = stack(pts)
    dim = points.shape[1]
    if dim > MAX_WELZL_DIM:
        raise CapacityError(f"exact covering ball supports d <= {MAX_WELZL_DIM}, got d = {dim}")
    unique = np.unique(points, axis=0)
    order = np.random.default_rng(seed).permutation(unique.shape[0])
    shuffled = [unique[i] for i in order]
    center, radius = _move_to_front(shuffled, len(shuffled), [], dim)
    return CoveringBall(center=as_vector(center), radius=float(radius))
