"""Reliable-broadcast messages."""

from dataclasses import dataclass
from typing import FrozenSet, Iterable, List

from core.errors import EquivocationError, InvalidParamsError
from core.vector import Vector, as_vector


@dataclass(frozen=True)
class Broadcast:
    """One vector from one sender, delivered identically to every recipient."""

    sender: int
    vector: Vector
    recipients: FrozenSet[int]

    def __post_init__(self):
        # non-finite vectors are rejected here, at the broadcast boundary
        object.__setattr__(self, "vector", as_vector(self.vector))
        object.__setattr__(self, "recipients", frozenset(self.recipients))


def check_reliable(broadcasts: Iterable[Broadcast], allowed_senders: Iterable[int]) -> List[Broadcast]:
    """Reject a round in which a sender speaks twice or an unknown sender speaks."""
    allowed = set(allowed_senders)
    seen = set()
    checked = []
    for msg in broadcasts:
        if msg.sender not in allowed:
            raise InvalidParamsError(f"node {msg.sender} is not a Byzantine sender")
        if msg.sender in seen:
            raise EquivocationError(f"node {msg.sender} broadcast more than once in one round")
        seen.add(msg.sender)
        checked.append(msg)
    return sorted(checked, key=lambda m: m.sender)
