"""Diversity protocol: grow k event sequences per context by iterative
sampling and score each target length with Self-BLEU.

Guided variants draw a fresh random entity or question at every step, from
the argument pool of the context events.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from statistics import fmean
from typing import Iterable, Optional

from ..backends.base import GeneratorBackend
from ..events import (
    Event,
    agent_question,
    entity_mention,
    generic_question,
    serialize_event,
    theme_question,
)
from ..generation import DecodeConfig, Variant, assemble_input
from .bleu import self_bleu


@dataclass(frozen=True)
class DiversityReport:
    variant: str
    per_length: dict[int, float]  # target length -> mean Self-BLEU over contexts
    num_contexts: int
    sequences_per_context: int

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "per_length": {str(k): v for k, v in self.per_length.items()},
            "num_contexts": self.num_contexts,
            "sequences_per_context": self.sequences_per_context,
        }


def _step_guidance(variant: str, entity_pool: list[str], rng: random.Random) -> Optional[str]:
    if variant == Variant.ELM:
        return None
    if variant == Variant.EGELM:
        return rng.choice(entity_pool) if entity_pool else ""
    options = [generic_question().surface]
    for entity in entity_pool:
        mention = entity_mention(entity)
        options.append(agent_question(mention).surface)
        options.append(theme_question(mention).surface)
    return rng.choice(options)


def _grow_sequence(
    backend: GeneratorBackend,
    seed_texts: list[str],
    entity_pool: list[str],
    variant: str,
    length: int,
    rng: random.Random,
    cfg: DecodeConfig,
) -> str:
    context = list(seed_texts)
    generated: list[str] = []
    for _ in range(length):
        guidance = _step_guidance(variant, entity_pool, rng)
        prompt = assemble_input(context, guidance, cfg)
        sample = backend.sample(prompt, 1, rng.randrange(2**32), cfg.max_output_tokens)[0]
        generated.append(sample)
        if sample:
            context.append(sample)
    return " . ".join(generated)


def diversity_protocol(
    backend: GeneratorBackend,
    contexts: list[tuple[Event, ...]],
    variant: str,
    lengths: Iterable[int] = range(1, 11),
    k: int = 5,
    seed: int = 0,
    max_n: int = 3,
    cfg: DecodeConfig = DecodeConfig(),
) -> DiversityReport:
    if not contexts:
        raise ValueError("need at least one context")
    variant = Variant.parse(variant)
    lengths = list(lengths)
    rng = random.Random(seed)

    scores: dict[int, list[float]] = {length: [] for length in lengths}
    for context in contexts:
        seed_texts = [serialize_event(e) for e in context]
        entity_pool: list[str] = []
        for event in context:
            for arg in (event.subject, event.object):
                if arg and arg not in entity_pool:
                    entity_pool.append(arg)
        for length in lengths:
            sequences = [
                _grow_sequence(backend, seed_texts, entity_pool, variant, length, rng, cfg)
                for _ in range(k)
            ]
            scores[length].append(self_bleu(sequences, max_n))

    return DiversityReport(
        variant=variant,
        per_length={length: fmean(values) for length, values in scores.items()},
        num_contexts=len(contexts),
        sequences_per_context=k,
    )
