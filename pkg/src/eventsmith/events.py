"""Domain model shared by every module: events, mentions, roles, questions,
and the (context, question, answer) instances mined from documents.

All types here are immutable after construction and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional


class MalformedEvent(ValueError):
    """Raised when an event text cannot be split into at least two fields."""


class Role(Enum):
    """Semantic role an entity plays in an event."""

    AGENT = "agent"
    THEME = "theme"


class DependencyRole(Enum):
    """Grammatical role attached to a noun phrase by the upstream parser."""

    SUBJECT = "SUBJECT"
    OBJECT = "OBJECT"
    OTHER = "OTHER"


class QuestionKind(Enum):
    AGENT = "agent"
    THEME = "theme"
    GENERIC = "generic"


def normalize(text: str) -> str:
    """Whitespace-collapsed, casefolded form used for all text comparison."""
    return " ".join(text.split()).casefold()


def contains_phrase(haystack: str, phrase: str) -> bool:
    """True when `phrase` occurs in `haystack` at word boundaries, after
    normalization. Character-level containment is not enough: "he" must not
    match inside "the".
    """
    h = normalize(haystack)
    p = normalize(phrase)
    if not p:
        return False
    return f" {p} " in f" {h} "


@dataclass(frozen=True)
class Event:
    """One open-domain (subject, predicate, object) tuple plus its position
    in the source document.

    `event_index` orders events across the whole document in discourse
    order; `sentence_index` points back at the sentence the tuple was
    extracted from.
    """

    subject: str
    predicate: str
    object: str
    sentence_index: int
    event_index: int

    def __post_init__(self) -> None:
        if not self.predicate:
            raise ValueError("event predicate must be non-empty")

    @property
    def text(self) -> str:
        return serialize_event(self)


@dataclass(frozen=True)
class NounPhraseMention:
    """A noun phrase occurrence inside one sentence.

    `token_span` is a half-open [start, end) token offset pair. `role` is the
    semantic role derived from the dependency annotation (None when the
    mention is neither subject nor object). `cluster_id` links the mention to
    a coreference cluster, or is None for singletons.
    """

    text: str
    sentence_index: int
    token_span: tuple[int, int]
    role: Optional[Role] = None
    cluster_id: Optional[str] = None

    def __post_init__(self) -> None:
        start, end = self.token_span
        if end <= start:
            raise ValueError(f"empty token span {self.token_span!r}")


@dataclass(frozen=True)
class CorefCluster:
    """All mentions that refer to one entity."""

    cluster_id: str
    mentions: tuple[NounPhraseMention, ...]

    def __post_init__(self) -> None:
        if not self.mentions:
            raise ValueError("coreference cluster must hold at least one mention")
        for m in self.mentions:
            if m.cluster_id != self.cluster_id:
                raise ValueError(
                    f"mention {m.text!r} carries cluster {m.cluster_id!r}, "
                    f"expected {self.cluster_id!r}"
                )


AGENT_TEMPLATE = "what else did {entity} do?"
THEME_TEMPLATE = "what else happened to {entity}?"
GENERIC_SURFACE = "what else happened?"


@dataclass(frozen=True)
class Question:
    """A role-based question about an entity, or the generic fallback.

    The surface string is fixed byte-for-byte by the three templates; the
    constructor enforces it so downstream prompt code can rely on exact
    wording.
    """

    kind: QuestionKind
    entity: Optional[NounPhraseMention]
    surface: str

    def __post_init__(self) -> None:
        if (self.entity is None) != (self.kind is QuestionKind.GENERIC):
            raise ValueError("entity must be absent exactly for generic questions")
        if self.surface != render_question(self.kind, self.entity):
            raise ValueError(f"question surface {self.surface!r} does not match template")

    @property
    def role(self) -> Optional[Role]:
        if self.kind is QuestionKind.AGENT:
            return Role.AGENT
        if self.kind is QuestionKind.THEME:
            return Role.THEME
        return None


def render_question(kind: QuestionKind, entity: Optional[NounPhraseMention]) -> str:
    if kind is QuestionKind.GENERIC:
        return GENERIC_SURFACE
    assert entity is not None
    if kind is QuestionKind.AGENT:
        return AGENT_TEMPLATE.format(entity=entity.text)
    return THEME_TEMPLATE.format(entity=entity.text)


def agent_question(entity: NounPhraseMention) -> Question:
    return Question(QuestionKind.AGENT, entity, render_question(QuestionKind.AGENT, entity))


def theme_question(entity: NounPhraseMention) -> Question:
    return Question(QuestionKind.THEME, entity, render_question(QuestionKind.THEME, entity))


def generic_question() -> Question:
    return Question(QuestionKind.GENERIC, None, GENERIC_SURFACE)


def entity_mention(text: str) -> NounPhraseMention:
    """Build a free-standing mention for entity text that has no sentence
    anchor (user input, instances loaded from disk)."""
    n_tokens = max(1, len(text.split()))
    return NounPhraseMention(text=text, sentence_index=0, token_span=(0, n_tokens))


@dataclass(frozen=True)
class CQAInstance:
    """One (context, question, answer) training or evaluation unit.

    The context is the full event prefix of the document up to the event the
    question was asked about; the answer is a strictly later event.
    """

    context: tuple[Event, ...]
    question: Question
    answer: Event
    document_id: str

    def __post_init__(self) -> None:
        if not self.context:
            raise ValueError("context must hold at least one event")
        indexes = [e.event_index for e in self.context]
        if indexes != list(range(len(indexes))):
            raise ValueError("context must be the document's event prefix")
        if self.answer.event_index <= self.context[-1].event_index:
            raise ValueError("answer must come after the last context event")


def serialize_event(event: Event) -> str:
    """Render an event as plain text: non-empty fields joined by single
    spaces, so (he, fled, "") becomes "he fled"."""
    parts = [" ".join(p.split()) for p in (event.subject, event.predicate, event.object)]
    return " ".join(p for p in parts if p)


def to_delimited(event: Event) -> str:
    """Lossless three-field rendering used in instance files."""
    return f"{event.subject}|{event.predicate}|{event.object}"


def parse_event_text(text: str, sentence_index: int = 0, event_index: int = 0) -> Event:
    """Inverse of the two renderings above.

    Pipe-delimited input recovers the exact fields. Plain text falls back to
    the positional reading: first token is the subject, second the predicate,
    the rest the object. Raises MalformedEvent when fewer than two fields are
    present.
    """
    if "|" in text:
        parts = text.split("|")
        if len(parts) < 2:
            raise MalformedEvent(f"need at least subject|predicate, got {text!r}")
        subject = parts[0]
        predicate = parts[1]
        obj = "|".join(parts[2:])
    else:
        tokens = text.split()
        if len(tokens) < 2:
            raise MalformedEvent(f"need at least two fields, got {text!r}")
        subject = tokens[0]
        predicate = tokens[1]
        obj = " ".join(tokens[2:])
    if not predicate:
        raise MalformedEvent(f"empty predicate in {text!r}")
    return Event(
        subject=subject,
        predicate=predicate,
        object=obj,
        sentence_index=sentence_index,
        event_index=event_index,
    )
