"""Predicate-level overlap between generated events and a flattened gold
schema: the share of gold events whose predicate is hit by at least one
generated event, exactly or through the synonym map.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..events import MalformedEvent, normalize, parse_event_text

_DOUBLED = set("bdfglmnprt")


def _stem_token(word: str) -> str:
    # Crude shared canonical form; both sides of a comparison go through it,
    # so "arrest", "arrests" and "arrested" all collide.
    if len(word) > 4 and word.endswith("ies"):
        word = word[:-3] + "y"
    elif len(word) > 4 and word.endswith("ied"):
        word = word[:-3] + "y"
    elif len(word) > 4 and word.endswith("ing"):
        word = word[:-3]
    elif len(word) > 3 and word.endswith("ed"):
        word = word[:-2]
    elif len(word) > 3 and word.endswith("es"):
        word = word[:-2]
    elif len(word) > 3 and word.endswith("s") and not word.endswith("ss"):
        word = word[:-1]
    if len(word) > 2 and word[-1] == word[-2] and word[-1] in _DOUBLED:
        word = word[:-1]
    if len(word) > 3 and word.endswith("e"):
        word = word[:-1]
    return word


def predicate_stem(predicate: str) -> str:
    return " ".join(_stem_token(tok) for tok in normalize(predicate).split())


@dataclass(frozen=True)
class GoldSchema:
    domain: str
    events: tuple[dict, ...]  # each {"predicate": ..., "text": ...}


_DETERMINERS = {
    "the", "a", "an", "his", "her", "its", "their", "this", "that",
    "these", "those", "some",
}


def generated_predicate(event_text: str) -> str:
    """Predicate of a generated event: exact for delimited texts, a
    determiner-aware positional guess for plain subject-first texts."""
    if "|" in event_text:
        try:
            return parse_event_text(event_text).predicate
        except MalformedEvent:
            return event_text.strip()
    tokens = event_text.split()
    if len(tokens) >= 3 and tokens[0].lower() in _DETERMINERS:
        return tokens[2]
    if len(tokens) >= 2:
        return tokens[1]
    return event_text.strip()


def _build_links(synonym_map: Optional[dict[str, list[str]]]) -> dict[str, set[str]]:
    links: dict[str, set[str]] = {}
    for predicate, synonyms in (synonym_map or {}).items():
        stem = predicate_stem(predicate)
        group = {stem} | {predicate_stem(s) for s in synonyms}
        for member in group:
            links.setdefault(member, set()).update(group)
    return links


def schema_overlap(
    generated_events: list[str],
    gold_schema_events: list[dict],
    synonym_map: Optional[dict[str, list[str]]] = None,
) -> float:
    """Percentage of gold events matched by at least one generated event."""
    if not gold_schema_events:
        raise ValueError("gold schema must hold at least one event")
    if not generated_events:
        return 0.0
    links = _build_links(synonym_map)
    generated_stems = {predicate_stem(generated_predicate(text)) for text in generated_events}

    matched = 0
    for gold in gold_schema_events:
        gold_stem = predicate_stem(gold["predicate"])
        candidates = {gold_stem} | links.get(gold_stem, set())
        if candidates & generated_stems:
            matched += 1
    return 100.0 * matched / len(gold_schema_events)


def read_gold_schemas(path: str | Path) -> list[GoldSchema]:
    schemas = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            record = json.loads(line)
            schemas.append(
                GoldSchema(domain=record["domain"], events=tuple(record["events"]))
            )
    return schemas


def read_synonym_map(path: str | Path) -> dict[str, list[str]]:
    synonyms: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            record = json.loads(line)
            synonyms[record["predicate"]] = list(record["synonyms"])
    return synonyms
