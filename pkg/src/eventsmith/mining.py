"""Mining of (context, question, answer) instances from annotated documents.

For every event, the noun phrases present in it are detected against the
source sentence, an agentive and a non-agentive question is generated for
each, and later events are scanned for a coreferent mention in the questioned
role. Events whose questions all stay unanswered contribute one generic
fallback instance whose answer is simply the next event.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterator, Optional

from .corpus import AnnotatedDocument, AnnotatedSentence, DEP_TO_ROLE
from .events import (
    CQAInstance,
    Event,
    NounPhraseMention,
    Question,
    QuestionKind,
    Role,
    agent_question,
    contains_phrase,
    entity_mention,
    generic_question,
    normalize,
    parse_event_text,
    serialize_event,
    theme_question,
    to_delimited,
)

logger = logging.getLogger(__name__)


class AnswerScope(Enum):
    FIRST_MATCH = "first"
    ALL_MATCHES = "all"


@dataclass(frozen=True)
class PipelineConfig:
    min_context_len: int = 1
    answer_scope: AnswerScope = AnswerScope.FIRST_MATCH
    emit_fallback: bool = True

    def __post_init__(self) -> None:
        if self.min_context_len < 1:
            raise ValueError("min_context_len must be at least 1")


def detect_noun_phrases(event: Event, sentence: AnnotatedSentence) -> list[NounPhraseMention]:
    """Sentence noun phrases that actually occur in the event text.

    Membership is word-boundary containment after normalization, so "rifle"
    is found in "a rifle" but "he" is not found in "the". Output keeps the
    sentence's positional order.
    """
    text = serialize_event(event)
    ordered = sorted(sentence.noun_phrases, key=lambda np: np.token_span)
    return [np for np in ordered if contains_phrase(text, np.text)]


def assign_role(np: NounPhraseMention, sentence: AnnotatedSentence) -> Optional[Role]:
    """Map the dependency annotation of a mention to its semantic role:
    subjects act, objects are acted upon, everything else is unassigned."""
    dep = sentence.dependency_roles.get(np.token_span)
    if dep is None:
        return None
    return DEP_TO_ROLE[dep]


def generate_questions(np: NounPhraseMention) -> list[Question]:
    """The two role questions for a mention, agentive first."""
    if not np.text:
        raise ValueError("cannot build questions for an empty mention")
    return [agent_question(np), theme_question(np)]


def _same_entity(a: NounPhraseMention, b: NounPhraseMention) -> bool:
    # Coreference decides when available; singletons fall back to exact text.
    if a.cluster_id is not None or b.cluster_id is not None:
        return a.cluster_id is not None and a.cluster_id == b.cluster_id
    return normalize(a.text) == normalize(b.text)


def iter_answers(
    seq: list[Event],
    t: int,
    question: Question,
    doc: AnnotatedDocument,
) -> Iterator[tuple[int, Event]]:
    """All events after position t that answer the question, in order.

    An event answers when it contains a mention of the questioned entity
    (same coreference cluster, or identical text when neither side is
    clustered) in the role the question asks about.
    """
    if question.kind is QuestionKind.GENERIC:
        raise ValueError("generic questions are not answered by scanning")
    assert question.entity is not None
    wanted_role = question.role
    for k in range(t + 1, len(seq)):
        candidate = seq[k]
        sentence = doc.sentences[candidate.sentence_index]
        for np_k in detect_noun_phrases(candidate, sentence):
            if assign_role(np_k, sentence) is not wanted_role:
                continue
            if _same_entity(question.entity, np_k):
                yield k, candidate
                break


def find_answer(
    seq: list[Event],
    t: int,
    question: Question,
    doc: AnnotatedDocument,
) -> Optional[tuple[int, Event]]:
    """Earliest answer event after position t, or None."""
    return next(iter_answers(seq, t, question, doc), None)


def build_instances(doc: AnnotatedDocument, cfg: PipelineConfig = PipelineConfig()) -> list[CQAInstance]:
    """Mine every instance the document supports.

    Output order is deterministic: by event position, then noun-phrase
    position, then agentive before non-agentive question (then answer
    position under ALL_MATCHES). The generic fallback for an event is emitted
    only when none of its questions found an answer and a next event exists.
    """
    seq = [event for sentence in doc.sentences for event in sentence.events]
    instances: list[CQAInstance] = []
    for t, event in enumerate(seq):
        context = tuple(seq[: t + 1])
        if len(context) < cfg.min_context_len:
            continue
        answered = False
        sentence = doc.sentences[event.sentence_index]
        for np in detect_noun_phrases(event, sentence):
            for question in generate_questions(np):
                if cfg.answer_scope is AnswerScope.ALL_MATCHES:
                    matches = list(iter_answers(seq, t, question, doc))
                else:
                    first = find_answer(seq, t, question, doc)
                    matches = [first] if first is not None else []
                for _, answer in matches:
                    answered = True
                    instances.append(
                        CQAInstance(
                            context=context,
                            question=question,
                            answer=answer,
                            document_id=doc.document_id,
                        )
                    )
        if cfg.emit_fallback and not answered and t + 1 < len(seq):
            instances.append(
                CQAInstance(
                    context=context,
                    question=generic_question(),
                    answer=seq[t + 1],
                    document_id=doc.document_id,
                )
            )
    return instances


def corpus_stats(instances: list[CQAInstance]) -> dict[str, int]:
    """Totals per question kind, plus document coverage."""
    counts = {QuestionKind.GENERIC: 0, QuestionKind.AGENT: 0, QuestionKind.THEME: 0}
    documents = set()
    for instance in instances:
        counts[instance.question.kind] += 1
        documents.add(instance.document_id)
    return {
        "total": len(instances),
        "generic": counts[QuestionKind.GENERIC],
        "agent": counts[QuestionKind.AGENT],
        "theme": counts[QuestionKind.THEME],
        "documents": len(documents),
    }


def instance_to_record(instance: CQAInstance) -> dict:
    return {
        "document_id": instance.document_id,
        "context": [to_delimited(e) for e in instance.context],
        "question": {
            "kind": instance.question.kind.value,
            "entity": None if instance.question.entity is None else instance.question.entity.text,
            "surface": instance.question.surface,
        },
        "answer": to_delimited(instance.answer),
    }


def record_to_instance(record: dict) -> CQAInstance:
    context = tuple(
        parse_event_text(text, sentence_index=i, event_index=i)
        for i, text in enumerate(record["context"])
    )
    kind = QuestionKind(record["question"]["kind"])
    entity_text = record["question"]["entity"]
    if kind is QuestionKind.GENERIC:
        question = generic_question()
    else:
        mention = entity_mention(entity_text)
        question = agent_question(mention) if kind is QuestionKind.AGENT else theme_question(mention)
    answer = parse_event_text(
        record["answer"], sentence_index=len(context), event_index=len(context)
    )
    return CQAInstance(
        context=context,
        question=question,
        answer=answer,
        document_id=str(record["document_id"]),
    )


def write_instances(instances: list[CQAInstance], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for instance in instances:
            handle.write(json.dumps(instance_to_record(instance), ensure_ascii=False) + "\n")


def read_instances(path: str | Path) -> list[CQAInstance]:
    instances: list[CQAInstance] = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                instances.append(record_to_instance(json.loads(line)))
    return instances
