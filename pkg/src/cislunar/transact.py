"""Atomic bilateral clock comparisons and the relational offset graph.

The rendezvous slot is the primitive: a comparison attempt either commits for
both participants (both ledgers atomically gain the identical record) or
aborts for both (neither ledger changes).  There is no in-flight state.  The
slot success probability is derived from link loss in both directions, and a
slot whose epoch falls inside a disruption window aborts.

"Time" at a node is only its measured relationships: queries over the offset
graph compose signed edge offsets along the minimum-variance path and answer
no-relation (None) when the endpoints live in different components.
"""

from __future__ import annotations

import enum
import heapq
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .broadcast import Link


class TransactionState(enum.Enum):
    PROPOSED = "proposed"
    COMMITTED = "committed"
    ABORTED = "aborted"


@dataclass(frozen=True)
class ComparisonTransaction:
    tx_id: int
    participants: tuple[str, str]
    state: TransactionState
    committed_offset: float | None = None  # displayed_a - displayed_b
    uncertainty: float | None = None
    rendezvous_epoch: float | None = None


@dataclass
class Ledger:
    """Per-node record of committed comparisons; never holds partial state."""

    node: str
    records: dict[int, ComparisonTransaction] = field(default_factory=dict)

    def add(self, tx: ComparisonTransaction) -> None:
        if tx.state is not TransactionState.COMMITTED:
            raise ValueError("only committed transactions enter a ledger")
        self.records[tx.tx_id] = tx

    def ids(self) -> set[int]:
        return set(self.records)


_tx_counter = itertools.count(1)


def attempt_comparison(a: Ledger, b: Ledger, link: Link, t: float,
                       rng: np.random.Generator,
                       displayed_a=None, displayed_b=None,
                       measurement_noise: float = 0.0) -> ComparisonTransaction:
    """One atomic rendezvous between the owners of ledgers a and b at time t.

    displayed_a/displayed_b map coordinate time to displayed clock time; when
    omitted the clocks are treated as ideal (displayed == t).  The committed
    offset is displayed_a - displayed_b at the slot epoch plus gaussian
    measurement noise; the edge uncertainty combines the configured noise
    with the residual delay asymmetry of the link.
    """
    tx_id = next(_tx_counter)
    succeeded = not link.blocked_at(t)
    if succeeded:
        p_slot = (1.0 - link.loss_probability) ** 2
        succeeded = rng.random() < p_slot
    if not succeeded:
        return ComparisonTransaction(tx_id, (a.node, b.node), TransactionState.ABORTED)

    read_a = displayed_a(t) if displayed_a is not None else t
    read_b = displayed_b(t) if displayed_b is not None else t
    offset = read_a - read_b
    if measurement_noise > 0:
        offset += measurement_noise * rng.standard_normal()
    uncertainty = math.hypot(measurement_noise, link.asymmetry / 2.0)
    tx = ComparisonTransaction(
        tx_id, (a.node, b.node), TransactionState.COMMITTED,
        committed_offset=float(offset), uncertainty=float(uncertainty),
        rendezvous_epoch=float(t))
    # both ledgers gain the identical record inside the same event
    a.add(tx)
    b.add(tx)
    return tx


@dataclass(frozen=True)
class OffsetEdge:
    a: str
    b: str
    offset: float       # seconds, signed: offset(a->b); offset(b->a) = -offset
    uncertainty: float
    rendezvous_epoch: float
    tx_id: int


@dataclass
class OffsetGraph:
    edges: list[OffsetEdge] = field(default_factory=list)

    def add_transaction(self, tx: ComparisonTransaction) -> None:
        if tx.state is not TransactionState.COMMITTED:
            raise ValueError("only committed transactions become edges")
        self.edges.append(OffsetEdge(
            a=tx.participants[0], b=tx.participants[1],
            offset=tx.committed_offset, uncertainty=tx.uncertainty,
            rendezvous_epoch=tx.rendezvous_epoch, tx_id=tx.tx_id))

    def nodes(self) -> list[str]:
        seen: dict[str, None] = {}
        for e in self.edges:
            seen.setdefault(e.a)
            seen.setdefault(e.b)
        return list(seen)

    def signed_offset(self, edge: OffsetEdge, tail: str) -> float:
        if tail == edge.a:
            return edge.offset
        if tail == edge.b:
            return -edge.offset
        raise ValueError(f"{tail!r} is not an endpoint of the edge")


@dataclass(frozen=True)
class OffsetQuery:
    offset: float
    uncertainty: float


def _edge_variance(edge: OffsetEdge, now: float, staleness_rate: float) -> float:
    stale = max(0.0, now - edge.rendezvous_epoch) * staleness_rate
    return edge.uncertainty ** 2 + stale ** 2


def query_offset(graph: OffsetGraph, a: str, b: str, now: float,
                 staleness_rate: float = 0.0) -> OffsetQuery | None:
    """Minimum-variance relational offset a - b, or None when unrelated.

    Edge variances (measurement uncertainty plus a staleness penalty in
    quadrature) add along the path; offsets compose by signed sum.  None is
    the architecture's honest answer for disconnected nodes, not a failure.
    """
    if a == b:
        return OffsetQuery(0.0, 0.0)
    # canonical direction keeps tie-broken paths identical for (a,b) and (b,a)
    if a > b:
        flipped = query_offset(graph, b, a, now, staleness_rate)
        return None if flipped is None else OffsetQuery(-flipped.offset,
                                                        flipped.uncertainty)
    best_edge: dict[tuple[str, str], tuple[float, OffsetEdge]] = {}
    neighbors: dict[str, set[str]] = {}
    for edge in graph.edges:
        var = _edge_variance(edge, now, staleness_rate)
        for tail, head in ((edge.a, edge.b), (edge.b, edge.a)):
            neighbors.setdefault(tail, set()).add(head)
            key = (tail, head)
            if key not in best_edge or var < best_edge[key][0]:
                best_edge[key] = (var, edge)
    if a not in neighbors or b not in neighbors:
        return None
    dist: dict[str, float] = {a: 0.0}
    offset_to: dict[str, float] = {a: 0.0}
    done: set[str] = set()
    heap: list[tuple[float, str]] = [(0.0, a)]
    while heap:
        d, node = heapq.heappop(heap)
        if node in done:
            continue
        done.add(node)
        if node == b:
            return OffsetQuery(offset_to[node], math.sqrt(d))
        for nxt in sorted(neighbors.get(node, ())):
            var, edge = best_edge[(node, nxt)]
            cand = d + var
            if nxt not in dist or cand < dist[nxt]:
                dist[nxt] = cand
                offset_to[nxt] = offset_to[node] + graph.signed_offset(edge, node)
                heapq.heappush(heap, (cand, nxt))
    return None


class MissingEdgeError(KeyError):
    """Raised when a cycle references a pair with no measured edge."""


def cycle_residual(graph: OffsetGraph, cycle: list[str]) -> float:
    """Signed sum of offsets around a closed node cycle.

    Zero for simultaneous noise-free measurements; nonzero residuals expose
    measurement noise or clock motion between edge epochs.  When several
    edges connect a pair the most recent one is used.
    """
    if len(cycle) < 3 or cycle[0] != cycle[-1]:
        raise ValueError("cycle must be closed and have at least 3 nodes")
    latest: dict[tuple[str, str], OffsetEdge] = {}
    for edge in graph.edges:
        key = tuple(sorted((edge.a, edge.b)))
        prev = latest.get(key)
        if prev is None or (edge.rendezvous_epoch, edge.tx_id) > (
                prev.rendezvous_epoch, prev.tx_id):
            latest[key] = edge
    total = 0.0
    for tail, head in zip(cycle, cycle[1:]):
        edge = latest.get(tuple(sorted((tail, head))))
        if edge is None:
            raise MissingEdgeError(f"no edge between {tail!r} and {head!r}")
        total += graph.signed_offset(edge, tail)
    return total
