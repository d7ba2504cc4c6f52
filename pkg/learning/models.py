"""Desk-scale classifiers with exact analytic gradients.

Parameters live in one flat vector theta so that gradients can be handed to the
aggregation rules unchanged. Layout: weights row-major, then biases, layer by layer.
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

import numpy as np
from scipy.special import logsumexp

from core.errors import DimensionMismatchError, EmptyInputError, InvalidParamsError, NonFiniteError

MAX_HIDDEN = 64


class ModelKind(str, Enum):
    SOFTMAX = "softmax"
    MLP = "mlp"


@dataclass(frozen=True)
class Model:
    kind: ModelKind
    input_dim: int
    num_classes: int
    hidden: int = 32

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.input_dim < 1 or self.num_classes < 2:
            raise InvalidParamsError(
                f"need input_dim >= 1 and num_classes >= 2 (got {self.input_dim}, {self.num_classes})"
            )
        if self.kind is ModelKind.MLP and not 1 <= self.hidden <= MAX_HIDDEN:
            raise InvalidParamsError(f"hidden units must be in [1, {MAX_HIDDEN}] (got {self.hidden})")

    @property
    def shapes(self) -> List[Tuple[int, ...]]:
        if self.kind is ModelKind.SOFTMAX:
            return [(self.input_dim, self.num_classes), (self.num_classes,)]
        return [
            (self.input_dim, self.hidden), (self.hidden,),
            (self.hidden, self.num_classes), (self.num_classes,),
        ]

    @property
    def param_count(self) -> int:
        return int(sum(np.prod(s) for s in self.shapes))

    def unpack(self, theta: np.ndarray) -> List[np.ndarray]:
        theta = np.asarray(theta, dtype=np.float64).reshape(-1)
        if theta.size != self.param_count:
            raise DimensionMismatchError(f"theta has {theta.size} entries, model needs {self.param_count}")
        parts, start = [], 0
        for shape in self.shapes:
            size = int(np.prod(shape))
            parts.append(theta[start:start + size].reshape(shape))
            start += size
        return parts

    def init_params(self, seed: int = 0) -> np.ndarray:
        """Zeros for softmax regression, small Gaussian weights for the MLP."""
        if self.kind is ModelKind.SOFTMAX:
            return np.zeros(self.param_count)
        rng = np.random.default_rng(seed)
        w1 = rng.normal(0.0, 1.0 / np.sqrt(self.input_dim), size=(self.input_dim, self.hidden))
        w2 = rng.normal(0.0, 1.0 / np.sqrt(self.hidden), size=(self.hidden, self.num_classes))
        return np.concatenate([w1.ravel(), np.zeros(self.hidden), w2.ravel(), np.zeros(self.num_classes)])


def _check_batch(model: Model, features: np.ndarray, labels: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.intp).reshape(-1)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyInputError("batch must be a non-empty (m, input_dim) array")
    if x.shape[1] != model.input_dim:
        raise DimensionMismatchError(f"features of width {x.shape[1]}, model expects {model.input_dim}")
    if y.size != x.shape[0]:
        raise DimensionMismatchError(f"{x.shape[0]} feature rows but {y.size} labels")
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("batch features contain non-finite values")
    return x, y


def _logits(model: Model, theta: np.ndarray, x: np.ndarray):
    parts = model.unpack(theta)
    if model.kind is ModelKind.SOFTMAX:
        w, b = parts
        return x @ w + b, None
    w1, b1, w2, b2 = parts
    hidden = np.tanh(x @ w1 + b1)
    return hidden @ w2 + b2, hidden


def loss_and_gradient(model: Model, theta: np.ndarray, features: np.ndarray,
                      labels: np.ndarray) -> Tuple[float, np.ndarray]:
    """Mean categorical cross-entropy over the batch and its gradient in theta."""
    x, y = _check_batch(model, features, labels)
    m = x.shape[0]
    logits, hidden = _logits(model, theta, x)
    log_norm = logsumexp(logits, axis=1)
    loss = float(np.mean(log_norm - logits[np.arange(m), y]))

    delta = np.exp(logits - log_norm[:, None])
    delta[np.arange(m), y] -= 1.0
    delta /= m

    if model.kind is ModelKind.SOFTMAX:
        return loss, np.concatenate([(x.T @ delta).ravel(), delta.sum(axis=0)])

    _, _, w2, _ = model.unpack(theta)
    back = (delta @ w2.T) * (1.0 - hidden ** 2)
    grad = np.concatenate([
        (x.T @ back).ravel(), back.sum(axis=0),
        (hidden.T @ delta).ravel(), delta.sum(axis=0),
    ])
    return loss, grad


def predict(model: Model, theta: np.ndarray, features: np.ndarray) -> np.ndarray:
    logits, _ = _logits(model, theta, np.asarray(features, dtype=np.float64))
    return np.argmax(logits, axis=1)


def accuracy(model: Model, theta: np.ndarray, features: np.ndarray, labels: np.ndarray) -> float:
    x, y = _check_batch(model, features, labels)
    return float(np.mean(predict(model, theta, x) == y))
