"""Axis-parallel hyperboxes."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from core.errors import DimensionMismatchError, InvalidParamsError
from core.vector import Vector, VectorSet, stack


@dataclass(frozen=True)
class Hyperbox:
    """Cartesian product of closed intervals [lo[k], hi[k]]."""

    lo: NDArray[np.float64]
    hi: NDArray[np.float64]

    def __post_init__(self):
        lo = np.array(self.lo, dtype=np.float64).reshape(-1)
        hi = np.array(self.hi, dtype=np.float64).reshape(-1)
        if lo.shape != hi.shape:
            raise DimensionMismatchError(f"lo has {lo.size} coordinates, hi has {hi.size}")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise InvalidParamsError("hyperbox bounds must be finite")
        if np.any(lo > hi):
            raise InvalidParamsError(f"hyperbox with lo > hi: {lo.tolist()} / {hi.tolist()}")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def from_intervals(cls, intervals) -> "Hyperbox":
        pairs = np.asarray(intervals, dtype=np.float64).reshape(-1, 2)
        return cls(pairs[:, 0], pairs[:, 1])

    @property
    def dim(self) -> int:
        return int(self.lo.size)

    @property
    def intervals(self):
        return list(zip(self.lo.tolist(), self.hi.tolist()))

    def contains(self, v: ArrayLike, tol: float = 0.0) -> bool:
        v = np.asarray(v, dtype=np.float64).reshape(-1)
        if v.size != self.dim:
            raise DimensionMismatchError(f"point of dimension {v.size} vs box of dimension {self.dim}")
        return bool(np.all(self.lo - tol <= v) and np.all(v <= self.hi + tol))

    def contains_box(self, other: "Hyperbox", tol: float = 0.0) -> bool:
        return bool(np.all(self.lo - tol <= other.lo) and np.all(other.hi <= self.hi + tol))

    def midpoint(self) -> Vector:
        mid = (self.lo + self.hi) / 2.0
        mid.setflags(write=False)
        return mid

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hyperbox):
            return NotImplemented
        return bool(np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi))

    def __hash__(self) -> int:
        return hash((self.lo.tobytes(), self.hi.tobytes()))


def bounding_box(vs: VectorSet) -> Hyperbox:
    """Smallest hyperbox containing every vector."""
    arr = stack(vs)
    return Hyperbox(arr.min(axis=0), arr.max(axis=0))


def box_intersection(a: Hyperbox, b: Hyperbox, tol: float = 0.0) -> Optional[Hyperbox]:
    """Coordinate-wise intersection, or None when it is empty.

    Coordinates whose bounds cross by at most ``tol`` collapse to their midpoint
    instead of making the intersection empty.
    """
    if a.dim != b.dim:
        raise DimensionMismatchError(f"boxes of dimension {a.dim} and {b.dim}")
    lo = np.maximum(a.lo, b.lo)
    hi = np.minimum(a.hi, b.hi)
    crossed = lo > hi
    if np.any(crossed):
        if np.any(lo[crossed] - hi[crossed] > tol):
            return None
        mid = (lo + hi) / 2.0
        lo = np.where(crossed, mid, lo)
        hi = np.where(crossed, mid, hi)
    return Hyperbox(lo, hi)


def e_max(h: Hyperbox) -> float:
    """Length of the longest edge."""
    return float(np.max(h.hi - h.lo))
