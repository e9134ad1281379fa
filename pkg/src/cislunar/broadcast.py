"""One-way broadcast and two-way transfer over a disruption-tolerant network.

Messages flow from authority to dependents; delivery may be lost (per-message
probability), blocked (send time inside a disruption window) or delayed
(base delay plus a signed asymmetry split across the two directions).  Every
delivery carries a monotone logical stamp.  The acknowledgment-chain helper
measures how deep a "you know that I know ..." ladder survives a lossy link;
the ladder depth is always a finite integer, there is no terminal value.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class Role(enum.Enum):
    AUTHORITY = "authority"
    DEPENDENT = "dependent"


@dataclass(frozen=True)
class Link:
    a: str
    b: str
    base_delay: float = 0.0       # seconds, symmetric part
    asymmetry: float = 0.0        # seconds, d(a->b) - d(b->a)
    loss_probability: float = 0.0
    disruption_windows: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        if self.base_delay < 0:
            raise ValueError("base_delay must be >= 0")
        if abs(self.asymmetry) / 2.0 > self.base_delay:
            raise ValueError("asymmetry too large for the base delay")
        if not (0.0 <= self.loss_probability < 1.0):
            raise ValueError("loss probability must satisfy 0 <= p < 1")
        windows = sorted(self.disruption_windows)
        for (s0, e0), (s1, _) in zip(windows, windows[1:]):
            if s1 < e0:
                raise ValueError("disruption windows must not overlap")
        for s, e in windows:
            if not (e > s):
                raise ValueError("disruption window must have positive length")

    def delay(self, origin: str) -> float:
        """One-way delay for a message leaving `origin`."""
        if origin == self.a:
            return self.base_delay + self.asymmetry / 2.0
        if origin == self.b:
            return self.base_delay - self.asymmetry / 2.0
        raise ValueError(f"{origin!r} is not an endpoint of this link")

    def blocked_at(self, t: float) -> bool:
        return any(s <= t < e for s, e in self.disruption_windows)


@dataclass(frozen=True)
class NodeSpec:
    id: str
    worldline_ref: str
    role: Role


@dataclass(frozen=True)
class Topology:
    nodes: tuple[NodeSpec, ...]
    links: tuple[Link, ...]

    def __post_init__(self) -> None:
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("node ids must be unique")
        known = set(ids)
        for link in self.links:
            if link.a not in known or link.b not in known:
                raise ValueError(f"link {link.a}-{link.b} references unknown node")


@dataclass(frozen=True)
class TimeSignal:
    origin: str
    emit_label: float          # origin's displayed time at emission
    lamport_stamp: int
    path: tuple[str, ...] = ()


class DeliveryStatus(enum.Enum):
    DELIVERED = "delivered"
    LOST = "lost"
    BLOCKED = "blocked"


@dataclass(frozen=True)
class Delivery:
    status: DeliveryStatus
    arrival: float | None = None  # coordinate seconds, set when delivered


@dataclass
class KnowledgeLadder:
    """Finite mutual-knowledge depth per ordered node pair.

    depth = k means "a knows that b knows that ... (k alternations) the
    offset".  By construction there is no distinguished 'common' value.
    """

    depths: dict[tuple[str, str], int] = field(default_factory=dict)

    def record(self, a: str, b: str, depth: int) -> None:
        if depth < 0:
            raise ValueError("depth must be >= 0")
        self.depths[(a, b)] = int(depth)


def deliver(signal: TimeSignal, link: Link, t: float, rng: np.random.Generator) -> Delivery:
    """Outcome of sending `signal` over `link` at coordinate time t.

    Loss and blocking are outcomes, not errors; a blocked or lost message
    must leave any would-be receiver untouched.
    """
    if link.blocked_at(t):
        return Delivery(DeliveryStatus.BLOCKED)
    if link.loss_probability > 0 and rng.random() < link.loss_probability:
        return Delivery(DeliveryStatus.LOST)
    return Delivery(DeliveryStatus.DELIVERED, arrival=t + link.delay(signal.origin))


def receive_stamp(local_stamp: int, signal: TimeSignal) -> int:
    """Logical-clock update at the receiver: max(local, message) + 1."""
    return max(local_stamp, signal.lamport_stamp) + 1


def one_way_offset(emit_label: float, assumed_delay: float,
                   local_displayed: float) -> float:
    """Offset estimate from a delivered one-way signal.

    estimate = emit_label + assumed_delay - local displayed time; the residual
    against truth is (true_delay - assumed_delay) plus whatever the local
    clock has drifted since the last synchronization.
    """
    return emit_label + assumed_delay - local_displayed


@dataclass(frozen=True)
class TwoWayResult:
    offset: float   # estimate of clock_b - clock_a
    t1: float       # a's displayed time at send
    t2: float       # b's displayed time at reception
    t3: float       # b's displayed time at response send
    t4: float       # a's displayed time at response reception


def two_way_transfer(displayed_a, displayed_b, link: Link, t: float,
                     rng: np.random.Generator,
                     turnaround: float = 0.0) -> TwoWayResult | None:
    """Four-timestamp exchange initiated by the link's `a` endpoint at t.

    displayed_a/displayed_b map coordinate time to each clock's displayed
    time.  Returns None (no estimate, state unchanged) when either leg is
    lost or blocked.  The estimate ((t2-t1)+(t3-t4))/2 cancels the symmetric
    delay; its bias is asymmetry/2.
    """
    forward = deliver(TimeSignal(link.a, 0.0, 0), link, t, rng)
    if forward.status is not DeliveryStatus.DELIVERED:
        return None
    t_reply = forward.arrival + turnaround
    backward = deliver(TimeSignal(link.b, 0.0, 0), link, t_reply, rng)
    if backward.status is not DeliveryStatus.DELIVERED:
        return None
    t1 = displayed_a(t)
    t2 = displayed_b(forward.arrival)
    t3 = displayed_b(t_reply)
    t4 = displayed_a(backward.arrival)
    offset = ((t2 - t1) + (t3 - t4)) / 2.0
    return TwoWayResult(offset=offset, t1=t1, t2=t2, t3=t3, t4=t4)


def run_ack_chain(a: str, b: str, k: int, loss_probability: float,
                  rng: np.random.Generator,
                  ladder: KnowledgeLadder | None = None) -> int:
    """Depth of a k-round alternating acknowledgment chain over a lossy link.

    Each round is an independent delivery with the given loss probability;
    the chain stops at the first loss, so P(depth >= k) = (1-p)^k.  The
    returned depth is recorded on the ladder when one is supplied.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not (0.0 <= loss_probability <= 1.0):
        raise ValueError("loss probability must be in [0, 1]")
    depth = 0
    for _ in range(k):
        if loss_probability > 0 and rng.random() < loss_probability:
            break
        depth += 1
    if ladder is not None:
        ladder.record(a, b, depth)
    return depth
