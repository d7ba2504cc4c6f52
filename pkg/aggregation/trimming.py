"""Minimum-diameter subsets and the locally trusted hyperbox."""

from itertools import combinations, islice
from typing import Iterator, List, Tuple

import numpy as np

from core.errors import CapacityError, InvalidParamsError
from core.hyperbox import Hyperbox
from core.params import SystemParams
from core.vector import TAU, VectorSet, pairwise_distances, stack

# Exhaustive subset enumeration bound on the number of vectors.
MAX_EXHAUSTIVE = 20
_CHUNK = 4096

IndexSet = Tuple[int, ...]


def _subset_diameters(dist: np.ndarray, size: int) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Yield (subsets, diameters) chunks in lexicographic subset order."""
    combos = combinations(range(dist.shape[0]), size)
    while True:
        chunk = np.array(list(islice(combos, _CHUNK)), dtype=np.intp)
        if chunk.size == 0:
            return
        block = dist[chunk[:, :, None], chunk[:, None, :]]
        yield chunk, block.reshape(chunk.shape[0], -1).max(axis=1)


def _check_subset_args(m: int, size: int) -> None:
    if not 1 <= size <= m:
        raise InvalidParamsError(f"subset size must be in [1, {m}] (got {size})")
    if m > MAX_EXHAUSTIVE:
        raise CapacityError(f"exhaustive subset search supports at most {MAX_EXHAUSTIVE} vectors, got {m}")


def min_diameter_subset(vs: VectorSet, size: int) -> IndexSet:
    """Index set of the given size with the smallest diameter.

    Among exact minimizers the lexicographically smallest index set wins.
    """
    points = stack(vs)
    _check_subset_args(points.shape[0], size)
    dist = pairwise_distances(points)
    best, best_diam = None, np.inf
    for subsets, diams in _subset_diameters(dist, size):
        j = int(np.argmin(diams))
        if diams[j] < best_diam:
            best, best_diam = tuple(int(i) for i in subsets[j]), float(diams[j])
    return best


def min_diameter_subsets(vs: VectorSet, size: int, tol: float = TAU) -> List[IndexSet]:
    """All index sets within ``tol`` of the minimum diameter, lexicographically ordered."""
    points = stack(vs)
    _check_subset_args(points.shape[0], size)
    dist = pairwise_distances(points)
    chunks = list(_subset_diameters(dist, size))
    lowest = min(float(d.min()) for _, d in chunks)
    found = []
    for subsets, diams in chunks:
        for row in subsets[diams <= lowest + tol]:
            found.append(tuple(int(i) for i in row))
    return found


def coordinate_trim(received: VectorSet, params: SystemParams) -> Hyperbox:
    """Locally trusted hyperbox: drop m - (n - t) values on each side of every coordinate."""
    points = stack(received)
    m = points.shape[0]
    quorum = params.quorum
    if m < quorum:
        raise InvalidParamsError(f"need at least n - t = {quorum} received vectors, got {m}")
    if m > params.n:
        raise InvalidParamsError(f"received {m} vectors from only n = {params.n} nodes")
    ordered = np.sort(points, axis=0)
    return Hyperbox(ordered[m - quorum], ordered[quorum - 1])
