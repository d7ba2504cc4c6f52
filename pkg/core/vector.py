"""Vector helpers: validation, distances and diameters.

Vectors are plain read-only float64 numpy arrays of shape (d,). Sets of vectors
are stacked into (m, d) arrays.
"""

from typing import Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial.distance import cdist

from core.errors import DimensionMismatchError, EmptyInputError, NonFiniteError

# Absolute tolerance for geometric predicates.
TAU = 1e-9

Vector = NDArray[np.float64]
VectorSet = Union[NDArray[np.float64], Sequence[ArrayLike]]


def as_vector(coords: ArrayLike) -> Vector:
    """Validate coordinates and return an immutable 1-D float64 vector."""
    v = np.array(coords, dtype=np.float64).reshape(-1)
    if v.size == 0:
        raise EmptyInputError("a vector needs at least one coordinate")
    if not np.all(np.isfinite(v)):
        raise NonFiniteError(f"vector has non-finite coordinates: {v.tolist()}")
    v.setflags(write=False)
    return v


def stack(vs: VectorSet) -> NDArray[np.float64]:
    """Stack vectors into an (m, d) array, checking equal dimension and finiteness."""
    if isinstance(vs, np.ndarray):
        arr = np.array(vs, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1) if arr.size else arr.reshape(0, 1)
    else:
        rows = [np.asarray(v, dtype=np.float64).reshape(-1) for v in vs]
        if not rows:
            raise EmptyInputError("empty vector set")
        dims = {r.size for r in rows}
        if len(dims) != 1:
            raise DimensionMismatchError(f"vectors of dimensions {sorted(dims)} in one set")
        arr = np.vstack(rows)
    if arr.shape[0] == 0:
        raise EmptyInputError("empty vector set")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("vector set contains non-finite coordinates")
    return arr


def euclidean_distance(a: ArrayLike, b: ArrayLike) -> float:
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimension {a.size} vs {b.size}")
    return float(np.linalg.norm(a - b))


def pairwise_distances(vs: VectorSet) -> NDArray[np.float64]:
    arr = stack(vs)
    return cdist(arr, arr)


def diameter(vs: VectorSet) -> float:
    """Largest pairwise Euclidean distance; 0 for a singleton."""
    arr = stack(vs)
    if arr.shape[0] == 1:
        return 0.0
    return float(pairwise_distances(arr).max())
