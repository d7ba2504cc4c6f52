"""Byzantine behaviours.

Byzantine nodes carry ids h..n-1 where h = n - f is the number of honest nodes.
Every behaviour is a deterministic function of (round, current honest vectors,
seed) and emits at most one broadcast per Byzantine node per round.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike

from aggregation.trimming import IndexSet
from core.errors import AdversarySpecError
from core.hyperbox import bounding_box, e_max
from core.messages import Broadcast
from core.params import SystemParams
from core.vector import TAU, Vector, as_vector

logger = logging.getLogger(__name__)


class AdversaryKind(str, Enum):
    CRASH = "crash"
    SIGN_FLIP = "sign_flip"
    FIXED_VECTOR = "fixed_vector"
    SELECTIVE_OMISSION = "selective_omission"
    MD_OSCILLATION = "md_oscillation"


class VectorRule(str, Enum):
    """Which vector a selectively omitting node sends, relative to the honest box."""

    OUTLIER = "outlier"
    HIGH_CORNER = "high_corner"
    LOW_CORNER = "low_corner"
    SPLIT_CORNERS = "split_corners"
    RANDOM_IN_BOX = "random_in_box"


class RecipientRule(str, Enum):
    ALL = "all"
    HALF = "half"
    ALTERNATE = "alternate"
    RANDOM = "random"


class Delivery(str, Enum):
    NO_MESSAGE = "no_message"
    AS_HONEST = "as_honest"


@dataclass(frozen=True)
class AdversarySpec:
    kind: AdversaryKind
    f: int
    crash_round: int = 1
    vector: Optional[Vector] = None
    flip_vectors: Tuple[Vector, ...] = ()
    vector_rule: VectorRule = VectorRule.OUTLIER
    recipient_rule: RecipientRule = RecipientRule.ALL
    outlier_scale: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "kind", AdversaryKind(self.kind))
        object.__setattr__(self, "vector_rule", VectorRule(self.vector_rule))
        object.__setattr__(self, "recipient_rule", RecipientRule(self.recipient_rule))
        if self.f < 0:
            raise AdversarySpecError(f"Byzantine count must be non-negative (got {self.f})")
        if self.crash_round < 1:
            raise AdversarySpecError(f"crash_round must be at least 1 (got {self.crash_round})")
        if self.kind is AdversaryKind.FIXED_VECTOR:
            if self.vector is None:
                raise AdversarySpecError("fixed_vector adversary needs a vector")
            object.__setattr__(self, "vector", as_vector(self.vector))
        if self.flip_vectors:
            if len(self.flip_vectors) != self.f:
                raise AdversarySpecError(
                    f"one flip vector per Byzantine node expected ({self.f}), got {len(self.flip_vectors)}"
                )
            object.__setattr__(self, "flip_vectors", tuple(as_vector(v) for v in self.flip_vectors))
        if self.kind is AdversaryKind.MD_OSCILLATION and self.f % 2:
            raise AdversarySpecError(f"md_oscillation splits Byzantine nodes in halves; f = {self.f} is odd")

    @classmethod
    def honest_only(cls) -> "AdversarySpec":
        return cls(AdversaryKind.CRASH, 0)


def sign_flip(g: ArrayLike) -> Vector:
    return as_vector(-np.asarray(g, dtype=np.float64))


def crash_behavior(round_index: int, recipient: int, crash_round: int = 1) -> Delivery:
    """A crashed node is silent towards everyone from its crash round on."""
    if round_index >= crash_round:
        return Delivery.NO_MESSAGE
    return Delivery.AS_HONEST


def _rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng([seed, *keys])


class Adversary:
    """Runtime behaviour of the f Byzantine nodes described by an AdversarySpec."""

    def __init__(self, spec: AdversarySpec, params: SystemParams, seed: int = 0):
        if spec.f != params.f:
            raise AdversarySpecError(f"spec has f = {spec.f} but params.f = {params.f}")
        self.spec = spec
        self.params = params
        self.seed = seed
        self.honest_ids = tuple(range(params.honest_count))
        self.byzantine_ids = tuple(range(params.honest_count, params.n))
        self._targets: dict = {}

    # -- recipients -------------------------------------------------------

    def _recipients(self, rule: RecipientRule, k: int, round_index: int) -> frozenset:
        h = len(self.honest_ids)
        if rule is RecipientRule.ALL:
            return frozenset(self.honest_ids)
        if rule is RecipientRule.HALF:
            half = h // 2
            return frozenset(range(half)) if k % 2 == 0 else frozenset(range(half, h))
        if rule is RecipientRule.ALTERNATE:
            return frozenset(i for i in self.honest_ids if i % 2 == k % 2)
        rng = _rng(self.seed, round_index, k, 1)
        return frozenset(i for i in self.honest_ids if rng.random() < 0.5)

    def _rule_vector(self, k: int, round_index: int, honest: np.ndarray) -> np.ndarray:
        box = bounding_box(honest)
        width = max(e_max(box), 1.0)
        rule = self.spec.vector_rule
        if rule is VectorRule.OUTLIER:
            return box.hi + self.spec.outlier_scale * width
        if rule is VectorRule.HIGH_CORNER:
            return box.hi
        if rule is VectorRule.LOW_CORNER:
            return box.lo
        if rule is VectorRule.SPLIT_CORNERS:
            return box.hi if k % 2 == 0 else box.lo
        rng = _rng(self.seed, round_index, k, 0)
        return rng.uniform(box.lo - width, box.hi + width)

    # -- rounds -----------------------------------------------------------

    def broadcasts(self, round_index: int, honest: np.ndarray) -> List[Broadcast]:
        """Messages of every Byzantine node for this round."""
        spec = self.spec
        h = len(self.honest_ids)
        everyone = frozenset(self.honest_ids)
        out: List[Broadcast] = []
        for k, sender in enumerate(self.byzantine_ids):
            if spec.kind is AdversaryKind.CRASH:
                if crash_behavior(round_index, sender, spec.crash_round) is Delivery.NO_MESSAGE:
                    continue
                out.append(Broadcast(sender, honest[k % h], everyone))
            elif spec.kind is AdversaryKind.SIGN_FLIP:
                base = spec.flip_vectors[k] if spec.flip_vectors else honest[k % h]
                out.append(Broadcast(
                    sender, sign_flip(base), self._recipients(spec.recipient_rule, k, round_index),
                ))
            elif spec.kind is AdversaryKind.FIXED_VECTOR:
                out.append(Broadcast(sender, spec.vector, everyone))
            elif spec.kind is AdversaryKind.SELECTIVE_OMISSION:
                out.append(Broadcast(
                    sender,
                    self._rule_vector(k, round_index, honest),
                    self._recipients(spec.recipient_rule, k, round_index),
                ))
            else:
                out.append(self._oscillation_message(k, sender, honest))
        return out

    def _oscillation_message(self, k: int, sender: int, honest: np.ndarray) -> Broadcast:
        h = len(self.honest_ids)
        first_group = frozenset(range(h // 2))
        second_group = frozenset(range(h // 2, h))
        if k < self.spec.f // 2:
            target, group = honest[0], first_group
        else:
            target, group = honest[h // 2], second_group
        for node in group:
            self._targets[node] = np.array(target)
        return Broadcast(sender, target, group)

    def tie_break(self, recipient: int, received: np.ndarray,
                  candidates: Sequence[IndexSet]) -> IndexSet:
        """Pick among equal-diameter subsets the one a worst-case node would use.

        For the oscillation attack that is the subset with the most copies of the
        vector the adversary pushed to this recipient; otherwise the first one.
        """
        target = self._targets.get(recipient)
        if self.spec.kind is not AdversaryKind.MD_OSCILLATION or target is None:
            return candidates[0]
        matches = np.linalg.norm(received - target, axis=1) < TAU
        counts = [int(matches[list(c)].sum()) for c in candidates]
        choice = candidates[int(np.argmax(counts))]
        logger.debug("node %d tie-break: %d candidates, picked %s", recipient, len(candidates), choice)
        return choice
