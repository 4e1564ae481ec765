"""Minkowski events, the light-cone order, and causally checked message delivery.

Coordinates are ``(x, y, z, t)`` with the signal speed set to 1. Lightlike
separation counts as causal: agents signal at exactly light speed.
"""
from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass, field

from .errors import DomainError

LIGHTLIKE_TOL = 1e-12


@dataclass(frozen=True)
class EventPoint:
    x: float
    y: float
    z: float
    t: float

    def __post_init__(self):
        for name in ("x", "y", "z", "t"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"coordinate {name} must be finite")
            object.__setattr__(self, name, value)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.z, self.t)

    def __str__(self) -> str:
        return "({:g},{:g},{:g},{:g})".format(*self.as_tuple())


ORIGIN = EventPoint(0.0, 0.0, 0.0, 0.0)


class CausalRelation(enum.Enum):
    CAUSALLY_PRECEDES = "causally_precedes"
    CAUSALLY_FOLLOWS = "causally_follows"
    SPACELIKE = "spacelike"
    COINCIDENT = "coincident"


def interval(a: EventPoint, b: EventPoint) -> float:
    """Squared interval dt^2 - dx^2 - dy^2 - dz^2 (symmetric in a, b)."""
    dt, dx, dy, dz = abs(b.t - a.t), abs(b.x - a.x), abs(b.y - a.y), abs(b.z - a.z)
    return dt * dt - dx * dx - dy * dy - dz * dz


def causal_relation(a: EventPoint, b: EventPoint) -> CausalRelation:
    if a == b:
        return CausalRelation.COINCIDENT
    s = interval(a, b)
    scale = max(1.0, abs(b.t - a.t) ** 2)
    if s < -LIGHTLIKE_TOL * scale:
        return CausalRelation.SPACELIKE
    if b.t > a.t:
        return CausalRelation.CAUSALLY_PRECEDES
    if b.t < a.t:
        return CausalRelation.CAUSALLY_FOLLOWS
    # equal times, distinct points, interval within rounding of zero
    return CausalRelation.SPACELIKE


def can_signal(a: EventPoint, b: EventPoint) -> bool:
    """True if a signal emitted at ``a`` can be received at ``b``."""
    return causal_relation(a, b) in (CausalRelation.CAUSALLY_PRECEDES, CausalRelation.COINCIDENT)


@dataclass(frozen=True)
class Geometry:
    separation: float
    p: EventPoint
    q0: EventPoint
    q1: EventPoint

    def __post_init__(self):
        if not self.separation > 0:
            raise DomainError("separation must be positive")
        if self.p != ORIGIN:
            raise DomainError("P must be the origin")
        for q in (self.q0, self.q1):
            if causal_relation(self.p, q) is not CausalRelation.CAUSALLY_PRECEDES or abs(interval(self.p, q)) > LIGHTLIKE_TOL * max(1.0, q.t**2):
                raise DomainError("Q0 and Q1 must be lightlike to the future of P")
        if causal_relation(self.q0, self.q1) is not CausalRelation.SPACELIKE:
            raise DomainError("Q0 and Q1 must be spacelike separated")

    @property
    def comparison_point(self) -> EventPoint:
        """Canonical event in the joint causal future of Q0 and Q1."""
        return EventPoint(0.0, 0.0, 0.0, 2.0 * self.separation)

    def wing(self, w: int) -> EventPoint:
        if w not in (0, 1):
            raise DomainError("wing must be 0 or 1")
        return self.q0 if w == 0 else self.q1


def standard_geometry(x: float = 1.0) -> Geometry:
    if not x > 0 or not math.isfinite(x):
        raise DomainError("separation x must be positive and finite")
    return Geometry(x, ORIGIN, EventPoint(x, 0, 0, x), EventPoint(-x, 0, 0, x))


@dataclass(frozen=True)
class Message:
    sender: str
    receiver: str
    payload: bytes
    kind: str = "classical"

    def __post_init__(self):
        if not isinstance(self.sender, str) or not self.sender:
            raise DomainError("message sender must be a non-empty string")
        if not isinstance(self.receiver, str) or not self.receiver:
            raise DomainError("message receiver must be a non-empty string")
        if not isinstance(self.payload, (bytes, bytearray)):
            raise DomainError("message payload must be bytes")


@dataclass(frozen=True)
class DeliveryResult:
    message: Message
    emitted_at: EventPoint
    received_at: EventPoint
    relation: CausalRelation
    delivered: bool

    @property
    def causality_violation(self) -> bool:
        return not self.delivered


def deliver(message: Message, emitted_at: EventPoint, received_at: EventPoint) -> DeliveryResult:
    """Deliver if the reception event lies in the causal future of the emission."""
    if not isinstance(message, Message):
        raise DomainError("deliver expects a Message")
    relation = causal_relation(emitted_at, received_at)
    ok = relation in (CausalRelation.CAUSALLY_PRECEDES, CausalRelation.COINCIDENT)
    return DeliveryResult(message, emitted_at, received_at, relation, ok)


@dataclass
class DeliveryLog:
    """Append-only record of every attempted delivery."""

    entries: list = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def send(self, message: Message, emitted_at: EventPoint, received_at: EventPoint) -> DeliveryResult:
        result = deliver(message, emitted_at, received_at)
        with self._lock:
            self.entries.append(result)
        return result

    def violations(self) -> list:
        return [e for e in self.entries if not e.delivered]

    def __iter__(self):
        return iter(list(self.entries))

    def __len__(self) -> int:
        return len(self.entries)
