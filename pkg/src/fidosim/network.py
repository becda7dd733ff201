"""Single-queue, round-based message delivery with interception and tracing.

Every envelope an entity emits goes through ``send``: installed hooks may
rewrite, drop or multiply it, and whatever comes out is queued. Delivery is
strictly FIFO. When the queue drains each entity gets an ``on_idle`` call,
which is where timeouts such as a missing registration ack fire.
"""

from __future__ import annotations

import json
from collections import Counter, deque
from collections.abc import Callable, Iterable
from dataclasses import asdict, dataclass, field
from typing import Protocol

from . import core
from .core import EntityId
from .envelope import WEBAUTHN_TYPES, MessageEnvelope, MsgType
from .errors import StepBudgetExceeded
from .events import EventLog


class Entity(Protocol):
    id: EntityId

    def receive(self, env: MessageEnvelope) -> list[MessageEnvelope]: ...

    def on_idle(self) -> list[MessageEnvelope]: ...


@dataclass(frozen=True)
class InterceptorHook:
    """``transform`` returns the envelopes that replace a matching one; [] drops it."""

    match: Callable[[MessageEnvelope], bool]
    transform: Callable[[MessageEnvelope], list[MessageEnvelope]]
    name: str = "hook"


@dataclass
class TraceRecord:
    step: int
    round: int
    kind: str  # "deliver", "drop" or "events"
    msg_type: str | None = None
    sender: str | None = None
    receiver: str | None = None
    origin: str | None = None
    size_bytes: int = 0
    mac_present: bool = False
    tampered: bool = False
    payload_digest: str | None = None
    detection_events: list[str] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    display_snapshots: list[dict] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))


DropRule = Callable[[int, MessageEnvelope], bool]


@dataclass
class _Queued:
    round: int
    env: MessageEnvelope
    tampered: bool


class Network:
    def __init__(
        self,
        events: EventLog,
        *,
        drop: Iterable[int] | DropRule | None = None,
        steps_budget: int = 10_000,
    ):
        self.events = events
        self.entities: dict[EntityId, Entity] = {}
        self.hooks: list[InterceptorHook] = []
        if drop is None or callable(drop):
            self._drop_rule = drop
        else:
            indices = frozenset(drop)
            self._drop_rule = lambda i, env: i in indices
        self.steps_budget = steps_budget
        self.trace: list[TraceRecord] = []
        self.bytes_sent: Counter[tuple[EntityId, MsgType]] = Counter()
        self.bytes_received: Counter[tuple[EntityId, MsgType]] = Counter()
        self.delivered: list[MessageEnvelope] = []
        self._queue: deque[_Queued] = deque()
        self._round = 0
        self._index = 0
        self._event_mark = 0

    def attach(self, entity: Entity) -> None:
        self.entities[entity.id] = entity

    def install(self, hook: InterceptorHook) -> None:
        self.hooks.append(hook)

    # -- sending ---------------------------------------------------------------

    def send(self, env: MessageEnvelope | None, *, round_: int | None = None) -> None:
        if env is None:
            return
        r = self._round if round_ is None else round_
        for hook in self.hooks:
            if hook.match(env):
                for out in hook.transform(env):
                    self._queue.append(_Queued(r, out, out != env))
                return
        self._queue.append(_Queued(r, env, False))

    def inject(self, env: MessageEnvelope) -> None:
        """Queue an envelope without passing it through the hooks."""
        self._queue.append(_Queued(self._round, env, True))

    # -- delivery --------------------------------------------------------------

    def _flush_events(self) -> list[dict]:
        fresh = self.events.since(self._event_mark)
        self._event_mark = self.events.mark()
        return [e.as_dict() for e in fresh]

    def _displays(self) -> list[dict]:
        snaps = []
        for eid in sorted(self.entities):
            panel = getattr(self.entities[eid], "display", None)
            if panel is not None:
                snaps.append({"entity": str(eid), **panel.as_dict()})
        return snaps

    def _record(self, q: _Queued, kind: str) -> TraceRecord:
        env = q.env
        rec = TraceRecord(
            step=self._index,
            round=q.round,
            kind=kind,
            msg_type=env.msg_type.name,
            sender=str(env.sender),
            receiver=str(env.receiver),
            origin=env.origin,
            size_bytes=env.size,
            mac_present=env.mac is not None,
            tampered=q.tampered,
            payload_digest=core.hash(env.payload).hex(),
        )
        self.trace.append(rec)
        return rec

    def _finish_record(self, rec: TraceRecord) -> None:
        rec.events = self._flush_events()
        rec.detection_events = [e["code"] for e in rec.events if e["kind"] == "DETECTION"]
        if rec.receiver is not None and rec.receiver.startswith("HSK:"):
            rec.display_snapshots = self._displays()

    def step(self) -> bool:
        if not self._queue:
            return False
        if self._index >= self.steps_budget:
            raise StepBudgetExceeded(f"more than {self.steps_budget} deliveries")
        q = self._queue.popleft()
        self._round = q.round
        env = q.env
        pre = self._flush_events()
        if pre:
            self.trace.append(TraceRecord(step=self._index, round=q.round, kind="events", events=pre))
        self.bytes_sent[(env.sender, env.msg_type)] += env.size
        if self._drop_rule is not None and self._drop_rule(self._index, env):
            rec = self._record(q, "drop")
            self._index += 1
            self._finish_record(rec)
            return True
        rec = self._record(q, "deliver")
        self._index += 1
        self.bytes_received[(env.receiver, env.msg_type)] += env.size
        self.delivered.append(env)
        target = self.entities.get(env.receiver)
        outs = target.receive(env) if target is not None else []
        self._finish_record(rec)
        for out in outs:
            self.send(out, round_=q.round + 1)
        return True

    def run(self) -> None:
        """Deliver until nothing is in flight, including anything idle timers emit."""
        while True:
            while self.step():
                pass
            emitted = False
            for eid in sorted(self.entities):
                for out in self.entities[eid].on_idle():
                    self.send(out, round_=self._round + 1)
                    emitted = True
            if not emitted:
                break
        self.close()

    def close(self) -> None:
        tail = self._flush_events()
        if tail:
            self.trace.append(TraceRecord(step=self._index, round=self._round, kind="events", events=tail))

    # -- accounting ------------------------------------------------------------

    def bytes_by_entity(self, types: Iterable[MsgType] = WEBAUTHN_TYPES) -> dict[str, int]:
        wanted = set(types)
        totals: Counter[str] = Counter()
        for counter in (self.bytes_sent, self.bytes_received):
            for (eid, t), n in counter.items():
                if t in wanted:
                    totals[str(eid)] += n
        return dict(sorted(totals.items()))

    def trace_lines(self) -> list[str]:
        return [r.to_json() for r in self.trace]
