"""Single-shot aggregation rules: mean, medoid, Krum and Multi-Krum."""

import numpy as np
from scipy.spatial.distance import cdist

from core.errors import InvalidParamsError
from core.params import SystemParams
from core.vector import Vector, VectorSet, as_vector, stack


def mean(vs: VectorSet) -> Vector:
    return as_vector(stack(vs).mean(axis=0))


def medoid_index(vs: VectorSet) -> int:
    points = stack(vs)
    # argmin returns the first minimum, i.e. the smallest index on ties
    return int(np.argmin(cdist(points, points).sum(axis=1)))


def medoid(vs: VectorSet) -> Vector:
    """Input vector with the smallest sum of distances to all inputs."""
    points = stack(vs)
    return as_vector(points[medoid_index(points)])


def krum_scores(vs: VectorSet, params: SystemParams, squared_distances: bool = False) -> np.ndarray:
    """Sum of distances from each vector to its n - t - 1 nearest other vectors.

    Neighbours at equal distance are taken in index order.
    """
    points = stack(vs)
    m = points.shape[0]
    neighbours = params.n - params.t - 1
    if neighbours < 1:
        raise InvalidParamsError(f"Krum needs n - t - 1 >= 1 (n={params.n}, t={params.t})")
    if m < params.quorum:
        raise InvalidParamsError(f"Krum needs at least n - t = {params.quorum} vectors, got {m}")

    dist = cdist(points, points)
    if squared_distances:
        dist = dist ** 2
    scores = np.empty(m)
    for i in range(m):
        others = np.delete(np.arange(m), i)
        order = np.argsort(dist[i, others], kind="stable")
        scores[i] = dist[i, others[order[:neighbours]]].sum()
    return scores


def krum(vs: VectorSet, params: SystemParams, squared_distances: bool = False) -> Vector:
    points = stack(vs)
    scores = krum_scores(points, params, squared_distances)
    return as_vector(points[int(np.argmin(scores))])


def multi_krum(vs: VectorSet, params: SystemParams, q: int, squared_distances: bool = False) -> Vector:
    """Mean of the q vectors with the smallest Krum scores."""
    points = stack(vs)
    if not 1 <= q <= points.shape[0]:
        raise InvalidParamsError(f"need 1 <= q <= {points.shape[0]} (got q={q})")
    scores = krum_scores(points, params, squared_distances)
    chosen = np.argsort(scores, kind="stable")[:q]
    return as_vector(points[chosen].mean(axis=0))
