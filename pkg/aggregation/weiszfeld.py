"""Geometric median via Weiszfeld iteration."""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from core.errors import InvalidParamsError
from core.vector import Vector, VectorSet, as_vector, stack

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WeiszfeldConfig:
    """Stopping rule and singularity guard of the Weiszfeld iteration."""

    tol: float = 1e-9
    max_iter: int = 1000
    singularity_eps: float = 1e-12

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidParamsError(f"tol must be positive (got {self.tol})")
        if self.max_iter < 1:
            raise InvalidParamsError(f"max_iter must be at least 1 (got {self.max_iter})")
        if not self.singularity_eps > 0:
            raise InvalidParamsError(f"singularity_eps must be positive (got {self.singularity_eps})")


DEFAULT_WEISZFELD = WeiszfeldConfig()


def objective(points: np.ndarray, mu: np.ndarray) -> float:
    """Sum of Euclidean distances from mu to every point."""
    return float(np.linalg.norm(points - mu, axis=1).sum())


def geometric_median(vs: VectorSet, cfg: WeiszfeldConfig = DEFAULT_WEISZFELD) -> Vector:
    """Approximate arg min of the sum of distances.

    One vector is its own median and two vectors give their midpoint. Otherwise
    the iteration starts at the coordinate-wise mean and stops once an update
    moves less than ``cfg.tol``. If an input point has a strictly smaller
    objective than the final iterate, that input point is returned instead.
    """
    points = stack(vs)
    m = points.shape[0]
    if m == 1:
        return as_vector(points[0])
    if m == 2:
        return as_vector((points[0] + points[1]) / 2.0)

    mu = points.mean(axis=0)
    for _ in range(cfg.max_iter):
        dist = np.linalg.norm(points - mu, axis=1)
        weights = 1.0 / np.maximum(dist, cfg.singularity_eps)
        nxt = (weights[:, None] * points).sum(axis=0) / weights.sum()
        moved = float(np.linalg.norm(nxt - mu))
        mu = nxt
        if moved < cfg.tol:
            break
    else:
        logger.warning("Weiszfeld hit max_iter=%d on %d points (last move %.3g)", cfg.max_iter, m, moved)

    # a median sitting on an input point is only approached linearly
    sums = cdist(points, points).sum(axis=1)
    best = int(np.argmin(sums))
    if sums[best] < objective(points, mu):
        mu = points[best]
    return as_vector(mu)
