"""System parameters and agreement instances."""

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Tuple

import numpy as np

from core.errors import DimensionMismatchError, InvalidParamsError
from core.vector import Vector, as_vector

if TYPE_CHECKING:
    from adversary.behaviors import AdversarySpec


@dataclass(frozen=True)
class SystemParams:
    """n nodes, at most t Byzantine, f actually Byzantine, dimension d."""

    n: int
    t: int
    f: int
    d: int

    def __post_init__(self):
        problems = []
        if self.n < 1:
            problems.append(f"n must be positive (got {self.n})")
        if self.d < 1:
            problems.append(f"d must be positive (got {self.d})")
        if not 0 <= self.f <= self.t:
            problems.append(f"need 0 <= f <= t (got f={self.f}, t={self.t})")
        if not 3 * self.t < self.n:
            problems.append(f"need t < n/3 (got t={self.t}, n={self.n})")
        if problems:
            raise InvalidParamsError("; ".join(problems))

    @property
    def quorum(self) -> int:
        """n - t, the number of messages every honest node is guaranteed to get."""
        return self.n - self.t

    @property
    def honest_count(self) -> int:
        return self.n - self.f


@dataclass(frozen=True)
class AgreementInstance:
    """Honest inputs, adversary and seed; equal instances give identical traces."""

    params: SystemParams
    honest_inputs: Tuple[Vector, ...]
    adversary: "AdversarySpec"
    seed: int = 0
    adversarial_tie_break: bool = False
    labels: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        inputs = tuple(as_vector(v) for v in self.honest_inputs)
        if len(inputs) != self.params.honest_count:
            raise InvalidParamsError(
                f"expected n - f = {self.params.honest_count} honest inputs, got {len(inputs)}"
            )
        for v in inputs:
            if v.size != self.params.d:
                raise DimensionMismatchError(f"honest input of dimension {v.size}, expected d={self.params.d}")
        if self.seed < 0:
            raise InvalidParamsError(f"seed must be unsigned (got {self.seed})")
        if self.adversary.f != self.params.f:
            raise InvalidParamsError(
                f"adversary controls {self.adversary.f} nodes but params.f = {self.params.f}"
            )
        object.__setattr__(self, "honest_inputs", inputs)

    @property
    def honest_array(self) -> np.ndarray:
        return np.vstack(self.honest_inputs)
