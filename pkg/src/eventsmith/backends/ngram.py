"""Reference generator backend: an add-alpha smoothed token n-gram model.

The model conditions on a reduced signature of the prompt, the last context
event plus the guidance string, and backs off to a model keyed only by the
guidance kind (agentive question, non-agentive question, generic, entity, or
unguided) when the exact signature was never seen in training. Small enough
to fit in seconds, rich enough that guided and unguided variants behave
measurably differently.
"""

from __future__ import annotations

import json
import math
import random
from collections import defaultdict
from pathlib import Path
from typing import Optional

from ..events import (
    AGENT_TEMPLATE,
    GENERIC_SURFACE,
    THEME_TEMPLATE,
    CQAInstance,
    normalize,
    serialize_event,
)
from ..generation import (
    EVENT_JOINER,
    GUIDANCE_SEPARATOR,
    DecodeConfig,
    Variant,
    instance_prompt,
)
from .base import GeneratorBackend

BOS = "<s>"
EOS = "</s>"

_AGENT_PREFIX = AGENT_TEMPLATE.split("{entity}")[0]
_AGENT_SUFFIX = AGENT_TEMPLATE.split("{entity}")[1]
_THEME_PREFIX = THEME_TEMPLATE.split("{entity}")[0]


class EmptyTrainingSet(ValueError):
    """Fitting was requested on zero instances."""


def reduce_input(input_text: str) -> tuple[str, str]:
    """Collapse a formatted prompt to (last event, guidance), normalized.

    Used identically at fit and at decode time so the two always agree on the
    conditioning signature.
    """
    if GUIDANCE_SEPARATOR in input_text:
        context_part, guidance = input_text.rsplit(GUIDANCE_SEPARATOR, 1)
    else:
        context_part, guidance = input_text, ""
    last_event = context_part.rsplit(EVENT_JOINER, 1)[-1]
    return normalize(last_event), normalize(guidance)


def guidance_kind(guidance: str) -> str:
    """Coarse class of the guidance string, the backoff conditioning key."""
    if not guidance:
        return ""
    if guidance == normalize(GENERIC_SURFACE):
        return "generic"
    if guidance.startswith(_AGENT_PREFIX) and guidance.endswith(_AGENT_SUFFIX):
        return "agent"
    if guidance.startswith(_THEME_PREFIX) and guidance.endswith("?"):
        return "theme"
    return "entity"


def _signature(last_event: str, guidance: str) -> str:
    return last_event + "\x1f" + guidance


# hist string -> {token -> count}
CountTable = dict[str, dict[str, int]]


class NgramEventModel(GeneratorBackend):
    """Token-level conditional n-gram model over answer event texts."""

    capabilities = frozenset({"score", "sample", "beam"})

    def __init__(
        self,
        order: int,
        alpha: float,
        variant: str,
        vocab: list[str],
        key_tables: dict[str, CountTable],
        kind_tables: dict[str, CountTable],
        description: str = "",
    ) -> None:
        self.order = order
        self.alpha = alpha
        self.variant = variant
        self.vocab = sorted(vocab)
        self.key_tables = key_tables
        self.kind_tables = kind_tables
        self.description = description or f"{variant} ngram(order={order})"
        self._totals: dict[int, dict[str, int]] = {}
        self._rebuild_totals()

    def _rebuild_totals(self) -> None:
        self._totals = {}
        for table in list(self.key_tables.values()) + list(self.kind_tables.values()):
            totals = {hist: sum(counts.values()) for hist, counts in table.items()}
            self._totals[id(table)] = totals

    def _table_for(self, input_text: str) -> Optional[CountTable]:
        last_event, guidance = reduce_input(input_text)
        table = self.key_tables.get(_signature(last_event, guidance))
        if table is not None:
            return table
        return self.kind_tables.get(guidance_kind(guidance))

    def _logprob(self, table: Optional[CountTable], hist: str, token: str) -> float:
        # One extra vocabulary slot keeps unseen tokens finite.
        denom_slots = len(self.vocab) + 1
        if table is None:
            return math.log(1.0 / denom_slots)
        counts = table.get(hist)
        count = 0 if counts is None else counts.get(token, 0)
        total = 0 if counts is None else self._totals[id(table)].get(hist, 0)
        return math.log((count + self.alpha) / (total + self.alpha * denom_slots))

    def _history(self, tokens: list[str], position: int) -> str:
        width = self.order - 1
        padded = [BOS] * width + tokens
        return " ".join(padded[position : position + width])

    def score(self, input_text: str, output_text: str) -> list[float]:
        table = self._table_for(input_text)
        tokens = output_text.split()
        return [
            self._logprob(table, self._history(tokens, i), token)
            for i, token in enumerate(tokens)
        ]

    def sample(self, input_text: str, n: int, seed: int, max_tokens: int) -> list[str]:
        table = self._table_for(input_text)
        rng = random.Random(seed)
        return [self._sample_one(table, rng, max_tokens) for _ in range(n)]

    def _sample_one(self, table: Optional[CountTable], rng: random.Random, max_tokens: int) -> str:
        tokens: list[str] = []
        smoothing_pool = self.vocab  # EOS is part of the vocabulary
        while len(tokens) < max_tokens:
            token = self._draw(table, self._history(tokens, len(tokens)), rng, smoothing_pool)
            if token == EOS:
                break
            tokens.append(token)
        return " ".join(tokens)

    def _draw(
        self,
        table: Optional[CountTable],
        hist: str,
        rng: random.Random,
        pool: list[str],
    ) -> str:
        counts = None if table is None else table.get(hist)
        total = 0
        if counts is not None:
            total = self._totals[id(table)].get(hist, 0)
        smoothing_mass = self.alpha * len(pool)
        # Two-stage draw: fitted counts first, uniform smoothing mass second.
        if total and rng.random() < total / (total + smoothing_mass):
            pick = rng.randrange(total)
            running = 0
            for token, count in counts.items():
                running += count
                if pick < running:
                    return token
        return pool[rng.randrange(len(pool))]

    def beam(self, input_text: str, beam_size: int, max_tokens: int) -> list[tuple[str, float]]:
        table = self._table_for(input_text)
        alive: list[tuple[float, tuple[str, ...]]] = [(0.0, ())]
        done: list[tuple[float, tuple[str, ...]]] = []
        for _ in range(max_tokens):
            if not alive:
                break
            expanded: list[tuple[float, tuple[str, ...]]] = []
            for score, tokens in alive:
                hist = self._history(list(tokens), len(tokens))
                for token in self.vocab:
                    step = score + self._logprob(table, hist, token)
                    if token == EOS:
                        done.append((step, tokens))
                    else:
                        expanded.append((step, tokens + (token,)))
            expanded.sort(key=lambda item: (-item[0], item[1]))
            alive = expanded[:beam_size]
        done.extend(alive)  # length-capped hypotheses still count
        done.sort(key=lambda item: (-item[0], item[1]))
        return [(" ".join(tokens), score) for score, tokens in done[:beam_size]]

    # ---- persistence ----

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "alpha": self.alpha,
            "variant": self.variant,
            "description": self.description,
            "vocab": self.vocab,
            "keys": self.key_tables,
            "kinds": self.kind_tables,
        }

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.to_dict(), handle, ensure_ascii=False)

    @classmethod
    def from_dict(cls, payload: dict) -> "NgramEventModel":
        return cls(
            order=payload["order"],
            alpha=payload["alpha"],
            variant=payload["variant"],
            vocab=payload["vocab"],
            key_tables=payload["keys"],
            kind_tables=payload["kinds"],
            description=payload.get("description", ""),
        )

    @classmethod
    def load(cls, path: str | Path) -> "NgramEventModel":
        with open(path, encoding="utf-8") as handle:
            return cls.from_dict(json.load(handle))


def fit_reference_backend(
    instances: list[CQAInstance],
    variant: str,
    order: int = 3,
    alpha: float = 0.01,
    cfg: DecodeConfig = DecodeConfig(),
) -> NgramEventModel:
    """Fit the reference model on mined instances for one variant."""
    variant = Variant.parse(variant)
    if not instances:
        raise EmptyTrainingSet("cannot fit a backend on zero instances")

    key_tables: dict[str, CountTable] = defaultdict(lambda: defaultdict(dict))
    kind_tables: dict[str, CountTable] = defaultdict(lambda: defaultdict(dict))
    vocab: set[str] = {EOS}
    width = order - 1

    for instance in instances:
        prompt = instance_prompt(instance, variant, cfg)
        last_event, guidance = reduce_input(prompt)
        signature = _signature(last_event, guidance)
        kind = guidance_kind(guidance)
        tokens = serialize_event(instance.answer).split()
        vocab.update(tokens)
        padded = [BOS] * width + tokens + [EOS]
        for i, token in enumerate(tokens + [EOS]):
            hist = " ".join(padded[i : i + width])
            for table in (key_tables[signature], kind_tables[kind]):
                slot = table[hist]
                slot[token] = slot.get(token, 0) + 1

    return NgramEventModel(
        order=order,
        alpha=alpha,
        variant=variant,
        vocab=sorted(vocab),
        key_tables={k: dict(v) for k, v in key_tables.items()},
        kind_tables={k: dict(v) for k, v in kind_tables.items()},
    )
