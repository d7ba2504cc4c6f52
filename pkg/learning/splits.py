"""Partitioning a dataset into equal-size client shards."""

from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

import numpy as np

from core.errors import DatasetError, InvalidParamsError
from learning.data import Dataset


class SplitKind(str, Enum):
    UNIFORM = "uniform"
    MILD = "mild"
    EXTREME = "extreme"


@dataclass(frozen=True)
class DataSplit:
    kind: SplitKind
    shards: Tuple[Dataset, ...]

    @property
    def shard_size(self) -> int:
        return len(self.shards[0])

    def classes_per_client(self) -> List[int]:
        return [int(np.unique(s.labels).size) for s in self.shards]


def mild_shares(n: int, cls: int) -> np.ndarray:
    """Fraction of class ``cls`` each client gets: one client half a share, the next one and a half."""
    shares = np.full(n, 1.0 / n)
    if n > 1:
        shares[cls % n] = 0.5 / n
        shares[(cls + 1) % n] = 1.5 / n
    return shares


def _uniform(labels: np.ndarray, n: int, rng: np.random.Generator) -> List[np.ndarray]:
    return np.array_split(rng.permutation(labels.size), n)


def _mild(labels: np.ndarray, n: int, num_classes: int, rng: np.random.Generator) -> List[np.ndarray]:
    parts: List[List[int]] = [[] for _ in range(n)]
    for cls in range(num_classes):
        members = rng.permutation(np.flatnonzero(labels == cls))
        if members.size == 0:
            continue
        bounds = np.floor(np.cumsum(mild_shares(n, cls)) * members.size).astype(int)
        bounds[-1] = members.size
        for client, piece in enumerate(np.split(members, bounds[:-1])):
            parts[client].extend(piece.tolist())
    return [rng.permutation(np.array(p, dtype=np.intp)) for p in parts]


def _extreme(labels: np.ndarray, n: int, rng: np.random.Generator) -> List[np.ndarray]:
    shuffled = rng.permutation(labels.size)
    by_label = shuffled[np.argsort(labels[shuffled], kind="stable")]
    pieces = np.array_split(by_label, 2 * n)
    order = rng.permutation(2 * n)
    return [np.concatenate([pieces[order[2 * i]], pieces[order[2 * i + 1]]]) for i in range(n)]


def split_dataset(dataset: Dataset, n: int, kind: SplitKind, seed: int = 0) -> DataSplit:
    """Shard the dataset across n clients; every shard is cut to the smallest size."""
    kind = SplitKind(kind)
    if n < 1:
        raise InvalidParamsError(f"need at least one client (got {n})")
    rng = np.random.default_rng(seed)
    if kind is SplitKind.UNIFORM:
        parts = _uniform(dataset.labels, n, rng)
    elif kind is SplitKind.MILD:
        parts = _mild(dataset.labels, n, dataset.num_classes, rng)
    else:
        parts = _extreme(dataset.labels, n, rng)
    size = min(p.size for p in parts)
    if size == 0:
        raise DatasetError(f"{len(dataset)} samples cannot fill {n} non-empty shards")
    return DataSplit(kind=kind, shards=tuple(dataset.subset(p[:size]) for p in parts))
