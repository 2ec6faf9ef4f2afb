"""eventsmith: mine question-guided event tuples from annotated documents,
drive guided event generation, evaluate it, and host interactive
schema-building sessions."""

from .events import (
    CQAInstance,
    CorefCluster,
    Event,
    MalformedEvent,
    NounPhraseMention,
    Question,
    QuestionKind,
    Role,
    parse_event_text,
    serialize_event,
)

__version__ = "0.1.0"

__all__ = [
    "CQAInstance",
    "CorefCluster",
    "Event",
    "MalformedEvent",
    "NounPhraseMention",
    "Question",
    "QuestionKind",
    "Role",
    "parse_event_text",
    "serialize_event",
    "__version__",
]
