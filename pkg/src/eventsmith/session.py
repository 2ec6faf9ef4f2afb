"""Interactive schema-generation sessions.

A session grows a tree of accepted events from a user-provided seed. At each
step the engine proposes four candidate events; the user selects one,
regenerates, returns to an earlier step, or stops. Every mutation is recorded
in an append-only action log from which the exact final state can be
replayed.

Counter semantics: selections are accepted events; regenerations and returns
are both rejected steps; regenerations alone are resamples. Tree depth is the
longest root-to-leaf path in edges, so a bare seed has depth 0.
"""

from __future__ import annotations

import json
import random
import time
import uuid
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Optional

from .backends.base import GeneratorBackend
from .events import (
    agent_question,
    entity_mention,
    generic_question,
    theme_question,
)
from .generation import DecodeConfig, Variant, assemble_input


class InvalidAction(ValueError):
    """The action does not apply to the current state."""


class SessionFinished(RuntimeError):
    """The session is over; only reads are allowed."""


class SessionNotFinished(RuntimeError):
    """Final metrics were requested for a running session."""


class CorruptLog(ValueError):
    """The action log cannot be replayed."""


class SessionState(Enum):
    AWAITING_ENTITY = "awaiting_entity"
    AWAITING_ACTION = "awaiting_action"
    FINISHED = "finished"


class ActionKind(Enum):
    SELECT = "select"
    REGENERATE = "regenerate"
    RETURN = "return"
    STOP = "stop"


@dataclass(frozen=True)
class UserAction:
    kind: ActionKind
    index: Optional[int] = None  # SELECT
    step: Optional[int] = None  # RETURN

    def payload(self) -> dict:
        out: dict = {"kind": self.kind.value}
        if self.index is not None:
            out["index"] = self.index
        if self.step is not None:
            out["step"] = self.step
        return out

    @staticmethod
    def from_payload(payload: dict) -> "UserAction":
        try:
            kind = ActionKind(payload["kind"])
        except (KeyError, ValueError) as exc:
            raise CorruptLog(f"bad action payload {payload!r}") from exc
        return UserAction(kind=kind, index=payload.get("index"), step=payload.get("step"))


@dataclass(frozen=True)
class SessionNode:
    node_id: int
    event: str
    parent: Optional[int]  # None marks the root
    step_index: int


@dataclass(frozen=True)
class SessionMetrics:
    accepted_events: int
    rejected_steps: int
    pct_rejected: float
    resamples: int
    total_steps: int
    tree_depth: int

    def to_dict(self) -> dict:
        return {
            "accepted_events": self.accepted_events,
            "rejected_steps": self.rejected_steps,
            "pct_rejected": self.pct_rejected,
            "resamples": self.resamples,
            "total_steps": self.total_steps,
            "tree_depth": self.tree_depth,
        }


@dataclass(frozen=True)
class SessionConfig:
    time_budget: float = 240.0
    rng_seed: int = 0
    candidates_per_step: int = 4
    samples_per_question: int = 2
    dedupe_retries: int = 3
    decode: DecodeConfig = DecodeConfig()
    clock: Callable[[], float] = time.time


@dataclass
class Session:
    session_id: str
    seed: str
    variant: str
    backend: GeneratorBackend
    config: SessionConfig
    started_at: float
    nodes: dict[int, SessionNode] = field(default_factory=dict)
    cursor: int = 0
    pending_candidates: list[str] = field(default_factory=list)
    state: SessionState = SessionState.AWAITING_ACTION
    accepted_events: int = 0
    rejected_steps: int = 0
    resamples: int = 0
    last_entity: Optional[str] = None
    rng: random.Random = field(default_factory=random.Random)
    log: list[dict] = field(default_factory=list)

    def node_path(self, node_id: int) -> list[SessionNode]:
        path: list[SessionNode] = []
        current: Optional[int] = node_id
        while current is not None:
            node = self.nodes[current]
            path.append(node)
            current = node.parent
        return list(reversed(path))

    def context_texts(self) -> list[str]:
        return [node.event for node in self.node_path(self.cursor)]

    def seconds_remaining(self, now: Optional[float] = None) -> float:
        now = self.config.clock() if now is None else now
        return max(0.0, self.config.time_budget - (now - self.started_at))

    def expired(self, now: Optional[float] = None) -> bool:
        return self.seconds_remaining(now) <= 0.0

    def tree_depth(self) -> int:
        depths = {0: 0}
        for node_id in sorted(self.nodes):
            node = self.nodes[node_id]
            if node.parent is not None:
                depths[node_id] = depths[node.parent] + 1
        return max(depths.values())

    def snapshot(self) -> dict:
        """Serializable view of the full mutable state, used for resume and
        for exact live-versus-replay comparison."""
        return {
            "session_id": self.session_id,
            "seed": self.seed,
            "variant": self.variant,
            "started_at": self.started_at,
            "state": self.state.value,
            "cursor": self.cursor,
            "pending_candidates": list(self.pending_candidates),
            "nodes": [
                {
                    "node_id": n.node_id,
                    "event": n.event,
                    "parent": n.parent,
                    "step_index": n.step_index,
                }
                for _, n in sorted(self.nodes.items())
            ],
            "accepted_events": self.accepted_events,
            "rejected_steps": self.rejected_steps,
            "resamples": self.resamples,
            "last_entity": self.last_entity,
            "metrics": current_metrics(self).to_dict(),
        }


def current_metrics(session: Session) -> SessionMetrics:
    total = session.accepted_events + session.rejected_steps
    pct = 100.0 * session.rejected_steps / total if total else 0.0
    return SessionMetrics(
        accepted_events=session.accepted_events,
        rejected_steps=session.rejected_steps,
        pct_rejected=pct,
        resamples=session.resamples,
        total_steps=total,
        tree_depth=session.tree_depth(),
    )


def finalize_metrics(session: Session) -> SessionMetrics:
    if session.state is not SessionState.FINISHED:
        raise SessionNotFinished("session is still running")
    return current_metrics(session)


def _record(session: Session, kind: str, payload: dict, ts: float) -> None:
    session.log.append(
        {"ts": ts, "session_id": session.session_id, "kind": kind, "payload": payload}
    )


def _sample_batch(
    session: Session, context_texts: list[str], guidance: Optional[str], n: int
) -> list[str]:
    prompt = assemble_input(context_texts, guidance, session.config.decode)
    seed = session.rng.randrange(2**32)
    return session.backend.sample(prompt, n, seed, session.config.decode.max_output_tokens)


def _candidate_guidances(session: Session, entity: Optional[str]) -> list[tuple[Optional[str], int]]:
    per_step = session.config.candidates_per_step
    if session.variant == Variant.QGELM:
        if entity is None:
            return [(generic_question().surface, per_step)]
        mention = entity_mention(entity)
        per_question = session.config.samples_per_question
        return [
            (agent_question(mention).surface, per_question),
            (theme_question(mention).surface, per_question),
        ]
    if session.variant == Variant.EGELM:
        return [(entity if entity is not None else "", per_step)]
    return [(None, per_step)]


def _draw_candidates(session: Session, entity: Optional[str]) -> list[str]:
    context = session.context_texts()
    plan = _candidate_guidances(session, entity)

    def draw() -> list[str]:
        batch: list[str] = []
        for guidance, count in plan:
            batch.extend(_sample_batch(session, context, guidance, count))
        return batch

    candidates = draw()
    retries = 0
    while len(set(candidates)) < len(candidates) and retries < session.config.dedupe_retries:
        retries += 1
        candidates = draw()
    return candidates


def start_session(
    seed: str,
    variant: str,
    backend: GeneratorBackend,
    config: SessionConfig = SessionConfig(),
    session_id: Optional[str] = None,
    now: Optional[float] = None,
) -> Session:
    """Open a session on a seed event. The question-guided variant starts by
    asking for an entity; the others propose candidates immediately."""
    if not seed.strip():
        raise ValueError("seed event must be non-empty")
    variant = Variant.parse(variant)
    now = config.clock() if now is None else now
    session = Session(
        session_id=session_id or uuid.uuid4().hex,
        seed=seed,
        variant=variant,
        backend=backend,
        config=config,
        started_at=now,
    )
    session.rng = random.Random(config.rng_seed)
    session.nodes[0] = SessionNode(node_id=0, event=seed, parent=None, step_index=0)
    _record(
        session,
        "start",
        {
            "seed": seed,
            "variant": variant,
            "time_budget": config.time_budget,
            "rng_seed": config.rng_seed,
        },
        now,
    )
    if variant == Variant.QGELM:
        session.state = SessionState.AWAITING_ENTITY
    else:
        session.pending_candidates = _draw_candidates(session, None)
        session.state = SessionState.AWAITING_ACTION
    return session


def propose_candidates(
    session: Session, entity: Optional[str], now: Optional[float] = None
) -> Session:
    """Fill the pending candidate slate for the current cursor.

    For the question-guided variant an entity yields two samples per role
    question; no entity falls back to the generic question.
    """
    now = session.config.clock() if now is None else now
    if session.state is SessionState.FINISHED:
        raise SessionFinished("session is finished")
    if session.expired(now):
        session.state = SessionState.FINISHED
        raise SessionFinished("time budget exhausted")
    if session.state is not SessionState.AWAITING_ENTITY:
        raise InvalidAction(f"cannot take an entity in state {session.state.value}")
    candidates = _draw_candidates(session, entity)
    session.last_entity = entity
    session.pending_candidates = candidates
    session.state = SessionState.AWAITING_ACTION
    _record(session, "entity", {"entity": entity}, now)
    return session


def apply_action(session: Session, action: UserAction, now: Optional[float] = None) -> Session:
    """Apply one user action. All fallible work happens before any state is
    touched, so a raised error leaves the session unchanged."""
    now = session.config.clock() if now is None else now
    if session.state is SessionState.FINISHED:
        raise SessionFinished("session is finished")

    if action.kind is ActionKind.STOP:
        session.state = SessionState.FINISHED
        session.pending_candidates = []
        _record(session, "action", action.payload(), now)
        return session

    if session.expired(now):
        session.state = SessionState.FINISHED
        raise SessionFinished("time budget exhausted")
    if session.state is not SessionState.AWAITING_ACTION:
        raise InvalidAction(f"no pending candidates in state {session.state.value}")

    if action.kind is ActionKind.SELECT:
        if action.index is None or not (0 <= action.index < len(session.pending_candidates)):
            raise InvalidAction(f"candidate index {action.index!r} out of range")
        event_text = session.pending_candidates[action.index]
        node_id = len(session.nodes)
        step_index = session.accepted_events + 1
        node = SessionNode(
            node_id=node_id, event=event_text, parent=session.cursor, step_index=step_index
        )
        next_candidates: Optional[list[str]] = None
        if session.variant != Variant.QGELM:
            # Sample for the extended context before committing anything.
            preview = replace(session, nodes={**session.nodes, node_id: node}, cursor=node_id)
            next_candidates = _draw_candidates(preview, session.last_entity)
        session.nodes[node_id] = node
        session.cursor = node_id
        session.accepted_events += 1
        if session.variant == Variant.QGELM:
            session.pending_candidates = []
            session.state = SessionState.AWAITING_ENTITY
        else:
            assert next_candidates is not None
            session.pending_candidates = next_candidates
        _record(session, "action", action.payload(), now)
        return session

    if action.kind is ActionKind.REGENERATE:
        candidates = _draw_candidates(session, session.last_entity)
        session.pending_candidates = candidates
        session.resamples += 1
        session.rejected_steps += 1
        _record(session, "action", action.payload(), now)
        return session

    if action.kind is ActionKind.RETURN:
        target = None
        for node in session.nodes.values():
            if node.step_index == action.step:
                target = node
                break
        if target is None:
            raise InvalidAction(f"no step {action.step!r} to return to")
        if session.variant == Variant.QGELM:
            next_candidates = None
        else:
            preview = replace(session, cursor=target.node_id)
            next_candidates = _draw_candidates(preview, session.last_entity)
        session.cursor = target.node_id
        session.rejected_steps += 1
        if session.variant == Variant.QGELM:
            session.pending_candidates = []
            session.state = SessionState.AWAITING_ENTITY
        else:
            session.pending_candidates = next_candidates or []
        _record(session, "action", action.payload(), now)
        return session

    raise InvalidAction(f"unsupported action kind {action.kind!r}")


def write_log(session: Session, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in session.log:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def append_log_record(record: dict, path: str | Path) -> None:
    with open(path, "a", encoding="utf-8") as handle:
        handle.write(json.dumps(record, ensure_ascii=False) + "\n")
        handle.flush()


def read_log(path: str | Path) -> list[dict]:
    records: list[dict] = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorruptLog(f"line {line_no}: {exc}") from exc
            for key in ("ts", "session_id", "kind", "payload"):
                if key not in record:
                    raise CorruptLog(f"line {line_no}: missing {key!r}")
            records.append(record)
    return records


def replay_log(
    records: list[dict],
    backend: GeneratorBackend,
    config: Optional[SessionConfig] = None,
) -> Session:
    """Re-execute a recorded session. Recorded timestamps drive the timer, so
    the reconstructed state matches the live run exactly."""
    if not records:
        raise CorruptLog("log holds no records")
    head = records[0]
    if head["kind"] != "start":
        raise CorruptLog(f"log must open with a start record, got {head['kind']!r}")
    payload = head["payload"]
    try:
        base = config or SessionConfig()
        session = start_session(
            seed=payload["seed"],
            variant=payload["variant"],
            backend=backend,
            config=SessionConfig(
                time_budget=payload["time_budget"],
                rng_seed=payload["rng_seed"],
                candidates_per_step=base.candidates_per_step,
                samples_per_question=base.samples_per_question,
                dedupe_retries=base.dedupe_retries,
                decode=base.decode,
                clock=base.clock,
            ),
            session_id=head["session_id"],
            now=head["ts"],
        )
    except KeyError as exc:
        raise CorruptLog(f"start record missing {exc}") from exc

    for record in records[1:]:
        kind = record["kind"]
        if kind == "entity":
            propose_candidates(session, record["payload"].get("entity"), now=record["ts"])
        elif kind == "action":
            apply_action(session, UserAction.from_payload(record["payload"]), now=record["ts"])
        else:
            raise CorruptLog(f"unknown record kind {kind!r}")
    return session
