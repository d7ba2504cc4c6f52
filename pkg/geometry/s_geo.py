"""The set of possible geometric medians and the hyperboxes built on it."""

from dataclasses import dataclass
from itertools import combinations
from typing import Tuple

import numpy as np

from aggregation.trimming import MAX_EXHAUSTIVE, IndexSet
from aggregation.weiszfeld import DEFAULT_WEISZFELD, WeiszfeldConfig, geometric_median
from core.errors import CapacityError, InvalidParamsError
from core.hyperbox import Hyperbox, bounding_box
from core.params import SystemParams
from core.vector import Vector, VectorSet, stack

# C(15, 10) = 3003 Weiszfeld runs at most.
MAX_S_GEO = 15


@dataclass(frozen=True)
class GeoMedianSet:
    """Geometric median of every size-(n - t) subset, in lexicographic subset order."""

    medians: Tuple[Vector, ...]
    subset_indices: Tuple[IndexSet, ...]

    def __len__(self) -> int:
        return len(self.medians)

    def as_array(self) -> np.ndarray:
        return np.vstack(self.medians)


def _check_size(m: int, params: SystemParams, bound: int) -> None:
    if m > bound:
        raise CapacityError(f"subset enumeration supports at most {bound} vectors, got {m}")
    if m < params.quorum:
        raise InvalidParamsError(f"need at least n - t = {params.quorum} vectors, got {m}")


def enumerate_s_geo(vs: VectorSet, params: SystemParams,
                    cfg: WeiszfeldConfig = DEFAULT_WEISZFELD) -> GeoMedianSet:
    points = stack(vs)
    _check_size(points.shape[0], params, MAX_S_GEO)
    subsets = tuple(combinations(range(points.shape[0]), params.quorum))
    medians = tuple(geometric_median(points[list(s)], cfg) for s in subsets)
    return GeoMedianSet(medians=medians, subset_indices=subsets)


def geo_hyperbox(vs: VectorSet, params: SystemParams,
                 cfg: WeiszfeldConfig = DEFAULT_WEISZFELD) -> Hyperbox:
    """Smallest hyperbox containing every possible geometric median."""
    return bounding_box(enumerate_s_geo(vs, params, cfg).as_array())


def mean_hyperbox(vs: VectorSet, params: SystemParams) -> Hyperbox:
    """Smallest hyperbox containing the mean of every size-(n - t) subset."""
    points = stack(vs)
    _check_size(points.shape[0], params, MAX_EXHAUSTIVE)
    subsets = np.array(list(combinations(range(points.shape[0]), params.quorum)), dtype=np.intp)
    means = points[subsets].mean(axis=1)
    return bounding_box(means)
