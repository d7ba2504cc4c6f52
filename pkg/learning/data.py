"""Datasets: Gaussian blobs, CSV files and the train/test split."""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from core.errors import DatasetError
from csv_handler.parser import read_dataset_rows, write_dataset_rows

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.intp).reshape(-1)
        if x.ndim != 2 or x.shape[0] == 0:
            raise DatasetError("dataset is empty")
        if y.size != x.shape[0]:
            raise DatasetError(f"{x.shape[0]} samples but {y.size} labels")
        if not np.all(np.isfinite(x)):
            raise DatasetError("features contain non-finite values")
        if y.min() < 0 or y.max() >= self.num_classes:
            raise DatasetError(f"labels must lie in [0, {self.num_classes})")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)

    def __len__(self) -> int:
        return int(self.labels.size)

    @property
    def input_dim(self) -> int:
        return int(self.features.shape[1])

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(self.features[idx], self.labels[idx], self.num_classes)


def generate_blobs(num_classes: int = 10, per_class: int = 200, spread: float = 1.0, seed: int = 0,
                   input_dim: int = 16, center_scale: float = 1.5) -> Dataset:
    """One isotropic Gaussian cluster per class, centers drawn from N(0, center_scale^2 I)."""
    if num_classes < 2 or per_class < 1 or input_dim < 1:
        raise DatasetError(
            f"need num_classes >= 2, per_class >= 1, input_dim >= 1 "
            f"(got {num_classes}, {per_class}, {input_dim})"
        )
    if spread < 0:
        raise DatasetError(f"spread must be non-negative (got {spread})")
    rng = np.random.default_rng(seed)
    centers = rng.normal(0.0, center_scale, size=(num_classes, input_dim))
    labels = np.repeat(np.arange(num_classes), per_class)
    features = centers[labels] + rng.normal(0.0, 1.0, size=(labels.size, input_dim)) * spread
    return Dataset(features, labels, num_classes)


def load_csv_dataset(path: str, max_value: float = 255.0, num_classes: Optional[int] = None) -> Dataset:
    """Read ``label,feat0,...`` rows and scale features by 1/max_value."""
    if not max_value > 0:
        raise DatasetError(f"max_value must be positive (got {max_value})")
    rows = read_dataset_rows(path)
    labels = np.array([label for label, _ in rows], dtype=np.intp)
    features = np.array([feats for _, feats in rows], dtype=np.float64) / max_value
    classes = int(labels.max()) + 1 if num_classes is None else num_classes
    logger.info("loaded %d samples with %d features from %s", len(rows), features.shape[1], path)
    return Dataset(features, labels, max(classes, 2))


def write_csv_dataset(dataset: Dataset, path: str, max_value: float = 255.0) -> None:
    write_dataset_rows(path, zip(dataset.labels.tolist(), (dataset.features * max_value).tolist()))


def train_test_split(dataset: Dataset, test_fraction: float = 0.1, seed: int = 0) -> Tuple[Dataset, Dataset]:
    if not 0 < test_fraction < 1:
        raise DatasetError(f"test_fraction must be in (0, 1) (got {test_fraction})")
    order = np.random.default_rng(seed).permutation(len(dataset))
    cut = max(1, int(round(len(dataset) * test_fraction)))
    if cut >= len(dataset):
        raise DatasetError(f"{len(dataset)} samples are too few for a test split")
    return dataset.subset(order[cut:]), dataset.subset(order[:cut])
