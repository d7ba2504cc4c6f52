"""Planar convex hull and point membership."""

from typing import List

import numpy as np
from numpy.typing import ArrayLike

from core.errors import DimensionMismatchError
from core.vector import TAU, VectorSet, stack


def _cross(o: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    return float((a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]))


def convex_hull_2d(pts: VectorSet) -> np.ndarray:
    """Hull vertices in counter-clockwise order (monotone chain)."""
    points = stack(pts)
    if points.shape[1] != 2:
        raise DimensionMismatchError(f"planar hull needs d = 2, got d = {points.shape[1]}")
    ordered = np.unique(points, axis=0)
    if ordered.shape[0] <= 2:
        return ordered

    def half(seq) -> List[np.ndarray]:
        chain: List[np.ndarray] = []
        for p in seq:
            while len(chain) >= 2 and _cross(chain[-2], chain[-1], p) <= 0:
                chain.pop()
            chain.append(p)
        return chain

    lower = half(ordered)
    upper = half(ordered[::-1])
    return np.array(lower[:-1] + upper[:-1])


def _segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    length2 = float(ab @ ab)
    if length2 == 0.0:
        return float(np.linalg.norm(p - a))
    s = min(1.0, max(0.0, float((p - a) @ ab) / length2))
    return float(np.linalg.norm(p - (a + s * ab)))


def convex_hull_membership_2d(p: ArrayLike, pts: VectorSet, tol: float = TAU) -> bool:
    """True iff p lies in the convex hull of pts, up to ``tol``."""
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    if p.size != 2:
        raise DimensionMismatchError(f"planar membership needs d = 2, got d = {p.size}")
    hull = convex_hull_2d(pts)
    if hull.shape[0] == 1:
        return float(np.linalg.norm(p - hull[0])) <= tol
    if hull.shape[0] == 2:
        return _segment_distance(p, hull[0], hull[1]) <= tol
    for i in range(hull.shape[0]):
        a, b = hull[i], hull[(i + 1) % hull.shape[0]]
        # signed distance of p from the edge line, positive on the inner side
        if _cross(a, b, p) / float(np.linalg.norm(b - a)) < -tol:
            return False
    return True
