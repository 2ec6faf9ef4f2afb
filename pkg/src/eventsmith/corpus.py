"""Loading and validation of pre-annotated documents.

Annotations (tokens, noun phrases with dependency roles, coreference
clusters, event tuples) are produced offline by external tooling; this
module only defines the JSONL exchange schema, checks the invariants, and
exposes the document-level event sequence.

One document per line:

    {"document_id": ...,
     "sentences": [{"tokens": [...],
                    "noun_phrases": [{"text": ..., "span": [s, e],
                                      "role": "SUBJECT"|"OBJECT"|"OTHER",
                                      "cluster_id": ... or null}],
                    "events": [{"subject": ..., "predicate": ..., "object": ...}]}],
     "clusters": [{"cluster_id": ..., "mentions": [{"sentence": i, "span": [s, e]}]}]}
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .events import (
    CorefCluster,
    DependencyRole,
    Event,
    NounPhraseMention,
    Role,
)

logger = logging.getLogger(__name__)

DEP_TO_ROLE = {
    DependencyRole.SUBJECT: Role.AGENT,
    DependencyRole.OBJECT: Role.THEME,
    DependencyRole.OTHER: None,
}


class CorpusFormatError(ValueError):
    """A line is not valid JSON or misses required fields."""


class ValidationError(ValueError):
    """A structurally parseable document violates an invariant."""


@dataclass(frozen=True)
class AnnotatedSentence:
    tokens: tuple[str, ...]
    noun_phrases: tuple[NounPhraseMention, ...]
    events: tuple[Event, ...]
    dependency_roles: dict[tuple[int, int], DependencyRole] = field(default_factory=dict)


@dataclass(frozen=True)
class AnnotatedDocument:
    document_id: str
    sentences: tuple[AnnotatedSentence, ...]
    clusters: tuple[CorefCluster, ...]

    def cluster_of(self, cluster_id: str) -> Optional[CorefCluster]:
        for cluster in self.clusters:
            if cluster.cluster_id == cluster_id:
                return cluster
        return None


def _parse_document(record: dict) -> AnnotatedDocument:
    """Build a document from one JSONL record, raising ValidationError on any
    invariant breach."""
    try:
        document_id = str(record["document_id"])
        raw_sentences = record["sentences"]
        raw_clusters = record.get("clusters", [])
    except (KeyError, TypeError) as exc:
        raise CorpusFormatError(f"missing field: {exc}") from exc

    sentences: list[AnnotatedSentence] = []
    event_counter = 0
    mention_lookup: dict[tuple[int, tuple[int, int]], NounPhraseMention] = {}

    for s_idx, raw in enumerate(raw_sentences):
        try:
            tokens = tuple(str(t) for t in raw["tokens"])
            raw_nps = raw.get("noun_phrases", [])
            raw_events = raw.get("events", [])
        except (KeyError, TypeError) as exc:
            raise CorpusFormatError(f"sentence {s_idx}: missing field {exc}") from exc

        noun_phrases: list[NounPhraseMention] = []
        dep_roles: dict[tuple[int, int], DependencyRole] = {}
        for raw_np in raw_nps:
            span = tuple(raw_np["span"])
            if len(span) != 2:
                raise ValidationError(f"sentence {s_idx}: span must be [start, end)")
            start, end = span
            if not (0 <= start < end <= len(tokens)):
                raise ValidationError(
                    f"sentence {s_idx}: span {span} outside {len(tokens)} tokens"
                )
            try:
                dep = DependencyRole(raw_np.get("role", "OTHER"))
            except ValueError as exc:
                raise ValidationError(f"sentence {s_idx}: unknown role {raw_np['role']!r}") from exc
            cluster_id = raw_np.get("cluster_id")
            mention = NounPhraseMention(
                text=str(raw_np["text"]),
                sentence_index=s_idx,
                token_span=(start, end),
                role=DEP_TO_ROLE[dep],
                cluster_id=None if cluster_id is None else str(cluster_id),
            )
            noun_phrases.append(mention)
            dep_roles[(start, end)] = dep
            mention_lookup[(s_idx, (start, end))] = mention

        events: list[Event] = []
        for raw_event in raw_events:
            try:
                event = Event(
                    subject=str(raw_event.get("subject", "")),
                    predicate=str(raw_event["predicate"]),
                    object=str(raw_event.get("object", "")),
                    sentence_index=s_idx,
                    event_index=event_counter,
                )
            except (KeyError, ValueError) as exc:
                raise ValidationError(f"sentence {s_idx}: bad event: {exc}") from exc
            events.append(event)
            event_counter += 1

        sentences.append(
            AnnotatedSentence(
                tokens=tokens,
                noun_phrases=tuple(noun_phrases),
                events=tuple(events),
                dependency_roles=dep_roles,
            )
        )

    clusters: list[CorefCluster] = []
    for raw_cluster in raw_clusters:
        try:
            cluster_id = str(raw_cluster["cluster_id"])
            raw_mentions = raw_cluster["mentions"]
        except (KeyError, TypeError) as exc:
            raise CorpusFormatError(f"cluster record: missing field {exc}") from exc
        mentions: list[NounPhraseMention] = []
        for raw_mention in raw_mentions:
            s_idx = raw_mention["sentence"]
            if not (0 <= s_idx < len(sentences)):
                raise ValidationError(
                    f"cluster {cluster_id}: sentence {s_idx} outside "
                    f"{len(sentences)}-sentence document"
                )
            span = tuple(raw_mention["span"])
            known = mention_lookup.get((s_idx, span))
            if known is None:
                raise ValidationError(
                    f"cluster {cluster_id}: mention at sentence {s_idx} span {span} "
                    "does not match any annotated noun phrase"
                )
            if known.cluster_id != cluster_id:
                raise ValidationError(
                    f"cluster {cluster_id}: noun phrase {known.text!r} carries "
                    f"cluster {known.cluster_id!r}"
                )
            mentions.append(known)
        clusters.append(CorefCluster(cluster_id=cluster_id, mentions=tuple(mentions)))

    return AnnotatedDocument(
        document_id=document_id,
        sentences=tuple(sentences),
        clusters=tuple(clusters),
    )


def load_corpus(path: str | Path, strict: bool = False) -> list[AnnotatedDocument]:
    """Read a JSONL corpus.

    In lenient mode (default) bad lines are logged with their line number and
    skipped; in strict mode the first bad line raises CorpusFormatError or
    ValidationError.
    """
    documents: list[AnnotatedDocument] = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusFormatError(f"invalid JSON: {exc}") from exc
                if not isinstance(record, dict):
                    raise CorpusFormatError("record must be a JSON object")
                documents.append(_parse_document(record))
            except (CorpusFormatError, ValidationError) as exc:
                if strict:
                    raise type(exc)(f"line {line_no}: {exc}") from exc
                logger.warning("skipping line %d: %s", line_no, exc)
    return documents


def document_to_record(doc: AnnotatedDocument) -> dict:
    return {
        "document_id": doc.document_id,
        "sentences": [
            {
                "tokens": list(sentence.tokens),
                "noun_phrases": [
                    {
                        "text": np.text,
                        "span": list(np.token_span),
                        "role": sentence.dependency_roles[np.token_span].value,
                        "cluster_id": np.cluster_id,
                    }
                    for np in sentence.noun_phrases
                ],
                "events": [
                    {"subject": e.subject, "predicate": e.predicate, "object": e.object}
                    for e in sentence.events
                ],
            }
            for sentence in doc.sentences
        ],
        "clusters": [
            {
                "cluster_id": cluster.cluster_id,
                "mentions": [
                    {"sentence": m.sentence_index, "span": list(m.token_span)}
                    for m in cluster.mentions
                ],
            }
            for cluster in doc.clusters
        ],
    }


def write_corpus(documents: list[AnnotatedDocument], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for doc in documents:
            handle.write(json.dumps(document_to_record(doc), ensure_ascii=False) + "\n")


def extract_event_sequence(doc: AnnotatedDocument) -> list[Event]:
    """All events of the document in discourse order: sentence order first,
    extractor emission order within a sentence."""
    sequence = [event for sentence in doc.sentences for event in sentence.events]
    for position, event in enumerate(sequence):
        if event.event_index != position:
            raise ValidationError(
                f"{doc.document_id}: event_index {event.event_index} at position {position}"
            )
    return sequence
