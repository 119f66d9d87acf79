"""Discrete-step simulation kernel: items, packets, inboxes, nodes and the run loop."""
from __future__ import annotations

import heapq
import io
import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, NamedTuple, Sequence

__all__ = [
    "Engine",
    "Event",
    "EventLog",
    "Inbox",
    "Item",
    "Node",
    "Packet",
    "SimClock",
    "UnknownPeer",
    "deliver",
    "make_item_id",
]

EVENT_KINDS = ("BLOCK_MINED", "INV_SENT", "GETDATA_SENT", "BLOCK_RECEIVED", "TIP_CHANGED")

_SEQ_BITS = 40


class UnknownPeer(Exception):
    """Raised when a node sends to someone it is not connected to."""


def make_item_id(origin_node: int, seq: int) -> int:
    """Globally unique item id built from the creator and its private counter.

    Ids never depend on how nodes are scheduled. Id 0 is reserved for genesis.
    """
    return ((origin_node + 1) << _SEQ_BITS) | seq


@dataclass
class SimClock:
    seconds_per_step: float
    current_step: int = 0

    def __post_init__(self):
        if not self.seconds_per_step > 0:
            raise ValueError("seconds_per_step must be > 0")

    def advance_to(self, step: int) -> None:
        if step < self.current_step:
            raise ValueError(f"clock cannot go backwards ({self.current_step} -> {step})")
        self.current_step = step

    def seconds(self, steps: float) -> float:
        return steps * self.seconds_per_step


@dataclass(frozen=True)
class Item:
    item_id: int
    origin_node: int
    created_step: int
    size_bytes: int


@dataclass(frozen=True)
class Packet:
    payload: Item
    sender: int
    recipient: int
    sent_step: int
    deliver_step: int

    def sort_key(self):
        return (self.sender, self.payload.item_id, self.sent_step)


class Inbox:
    """Packets waiting for a node, bucketed by delivery step."""

    def __init__(self):
        self.pending: dict[int, list[Packet]] = defaultdict(list)
        self._steps: list[int] = []

    def __len__(self) -> int:
        return sum(len(v) for v in self.pending.values())

    def put(self, packet: Packet) -> None:
        bucket = self.pending[packet.deliver_step]
        if not bucket:
            heapq.heappush(self._steps, packet.deliver_step)
        bucket.append(packet)

    def next_step(self) -> int | None:
        while self._steps and self._steps[0] not in self.pending:
            heapq.heappop(self._steps)
        return self._steps[0] if self._steps else None

    def deliver(self, step: int) -> list[Packet]:
        packets = self.pending.pop(step, None)
        if not packets:
            return []
        packets.sort(key=Packet.sort_key)
        return packets


def deliver(inbox: Inbox, step: int) -> list[Packet]:
    return inbox.deliver(step)


class Event(NamedTuple):
    step: int
    event_kind: str
    node_id: int
    item_id: int
    extra: dict

    def to_json(self) -> str:
        return json.dumps(
            {
                "step": self.step,
                "event_kind": self.event_kind,
                "node_id": self.node_id,
                "item_id": self.item_id,
                "extra": self.extra,
            },
            sort_keys=True,
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, line: str) -> "Event":
        d = json.loads(line)
        return cls(d["step"], d["event_kind"], d["node_id"], d["item_id"], d["extra"])


class EventLog(list):
    """Ordered list of :class:`Event`, serializable as JSON lines."""

    def dumps(self) -> str:
        buf = io.StringIO()
        for ev in self:
            buf.write(ev.to_json())
            buf.write("\n")
        return buf.getvalue()

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "EventLog":
        return cls(Event.from_json(line) for line in text.splitlines() if line.strip())

    @classmethod
    def read(cls, path: str | Path) -> "EventLog":
        return cls.loads(Path(path).read_text())

    def of_kind(self, *kinds: str) -> Iterable[Event]:
        return (ev for ev in self if ev.event_kind in kinds)


class Node:
    """Base participant.

    Subclasses override :meth:`receive` and :meth:`act`. A handler sees only
    its own state and the packets due this step; its only effect on the world
    is queuing outbound items with :meth:`send`.
    """

    def __init__(self, node_id: int, region: str):
        self.node_id = node_id
        self.region = region
        self.peers: tuple[int, ...] = ()
        self.inbox = Inbox()
        self.outbox: list[tuple[int, Item]] = []
        self.events: list[Event] = []
        self._seq = 0

    def __repr__(self) -> str:
        return f"{type(self).__name__}(id={self.node_id}, region={self.region!r})"

    def new_item_id(self) -> int:
        self._seq += 1
        return make_item_id(self.node_id, self._seq)

    def send(self, recipient: int, item: Item) -> None:
        self.outbox.append((recipient, item))

    def log(self, step: int, kind: str, item_id: int, **extra) -> None:
        self.events.append(Event(step, kind, self.node_id, item_id, extra))

    def step(self, step: int) -> None:
        for packet in self.inbox.deliver(step):
            self.receive(packet, step)
        self.act(step)

    def receive(self, packet: Packet, step: int) -> None:
        pass

    def act(self, step: int) -> None:
        pass

    def next_timer(self, step: int, horizon: int) -> int | None:
        """Next step in (step, horizon) at which :meth:`act` may do something.

        Steps before it with an empty inbox are guaranteed no-ops, which lets
        the engine skip them.
        """
        return None


DelayFn = Callable[[Node, Node, Item], int]


@dataclass
class RunStats:
    steps_executed: int = 0
    active_steps: int = 0
    handler_calls: int = 0
    packets_sent: int = 0
    packets_delivered: int = 0
    packets_pending: int = 0


@dataclass
class Engine:
    """Owns the clock and routes packets between nodes.

    ``delay_fn(sender, recipient, item)`` gives the transfer delay in steps;
    it is clamped to at least one step.
    """

    nodes: Sequence[Node]
    delay_fn: DelayFn
    seconds_per_step: float
    clock: SimClock = field(init=False)
    stats: RunStats = field(default_factory=RunStats)

    def __post_init__(self):
        self.clock = SimClock(self.seconds_per_step)
        for i, node in enumerate(self.nodes):
            if node.node_id != i:
                raise ValueError(f"node ids must be 0..N-1, got {node.node_id} at position {i}")
        self._peer_sets = [frozenset(n.peers) for n in self.nodes]
        self._agenda: dict[int, set[int]] = {}
        self._agenda_steps: list[int] = []

    def connect(self, adjacency: dict[int, Iterable[int]]) -> None:
        for node in self.nodes:
            node.peers = tuple(sorted(adjacency.get(node.node_id, ())))
        self._peer_sets = [frozenset(n.peers) for n in self.nodes]

    def _wake(self, step: int, node_id: int) -> None:
        bucket = self._agenda.get(step)
        if bucket is None:
            self._agenda[step] = {node_id}
            heapq.heappush(self._agenda_steps, step)
        else:
            bucket.add(node_id)

    def send(self, sender: int, recipient: int, item: Item, sent_step: int) -> Packet:
        if recipient not in self._peer_sets[sender]:
            raise UnknownPeer(f"node {recipient} is not a peer of node {sender}")
        delay = max(1, int(self.delay_fn(self.nodes[sender], self.nodes[recipient], item)))
        packet = Packet(item, sender, recipient, sent_step, sent_step + delay)
        self.nodes[recipient].inbox.put(packet)
        self._wake(packet.deliver_step, recipient)
        self.stats.packets_sent += 1
        return packet

    def _call(self, node: Node, step: int, log: EventLog, horizon: int) -> None:
        self.stats.packets_delivered += len(node.inbox.pending.get(step, ()))
        node.step(step)
        self.stats.handler_calls += 1
        if node.outbox:
            out, node.outbox = node.outbox, []
            for recipient, item in out:
                self.send(node.node_id, recipient, item, step)
        if node.events:
            log.extend(node.events)
            node.events = []
        nxt = node.next_timer(step, horizon)
        if nxt is not None and step < nxt < horizon:
            self._wake(nxt, node.node_id)

    def run(
        self,
        total_steps: int,
        order: Sequence[int] | None = None,
        skip_idle: bool = True,
        start_step: int = 0,
    ) -> EventLog:
        """Execute steps ``start_step .. total_steps-1`` and return their events.

        ``order`` permutes the node iteration order within a step; results do
        not depend on it. With ``skip_idle=False`` every node handler runs at
        every step (the reference semantics); with ``skip_idle=True`` handlers
        are only run at steps where they have packets due or a pending timer.
        A later call with ``start_step`` equal to the previous ``total_steps``
        continues the same run.
        """
        n = len(self.nodes)
        order = list(range(n)) if order is None else list(order)
        if sorted(order) != list(range(n)):
            raise ValueError("order must be a permutation of node ids")
        rank = {nid: i for i, nid in enumerate(order)}
        log = EventLog()

        if start_step < self.clock.current_step:
            raise ValueError("start_step is before the current clock")
        for node in self.nodes:
            first = node.next_timer(start_step - 1, total_steps)
            if first is not None and start_step <= first < total_steps:
                self._wake(first, node.node_id)

        if skip_idle:
            while self._agenda_steps and self._agenda_steps[0] < total_steps:
                step = heapq.heappop(self._agenda_steps)
                active = self._agenda.pop(step)
                self.clock.advance_to(step)
                self.stats.active_steps += 1
                step_events = EventLog()
                for nid in sorted(active, key=rank.__getitem__):
                    self._call(self.nodes[nid], step, step_events, total_steps)
                _canonical_extend(log, step_events)
            self.stats.steps_executed += total_steps - start_step
        else:
            for step in range(start_step, total_steps):
                self.clock.advance_to(step)
                step_events = EventLog()
                for nid in order:
                    self._call(self.nodes[nid], step, step_events, total_steps)
                _canonical_extend(log, step_events)
                self._agenda.pop(step, None)
            self._agenda_steps = [s for s in self._agenda_steps if s >= total_steps]
            heapq.heapify(self._agenda_steps)
            self.stats.steps_executed += total_steps - start_step
            self.stats.active_steps += total_steps - start_step

        self.stats.packets_pending = sum(len(node.inbox) for node in self.nodes)
        return log


def _canonical_extend(log: EventLog, step_events: list[Event]) -> None:
    # stable sort: keeps each node's own emission order
    step_events.sort(key=lambda ev: ev.node_id)
    log.extend(step_events)
