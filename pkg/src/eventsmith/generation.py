"""Prompt construction for the three model variants and the thin decode
wrappers that talk to a generator backend.

Variants differ only in what, if anything, follows the context:

    ELM     context only
    EGELM   context [SEP] entity
    QGELM   context [SEP] question
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

from .backends.base import BackendFailure, GeneratorBackend
from .events import CQAInstance, Event, QuestionKind, serialize_event

EVENT_JOINER = " . "
GUIDANCE_SEPARATOR = " [SEP] "

Tokenizer = Callable[[str], int]


def whitespace_token_count(text: str) -> int:
    return len(text.split())


class Variant:
    """The three conditioning flavors."""

    ELM = "elm"
    EGELM = "egelm"
    QGELM = "qgelm"

    ALL = (ELM, EGELM, QGELM)

    @staticmethod
    def parse(value: str) -> str:
        value = value.lower()
        if value not in Variant.ALL:
            raise ValueError(f"unknown variant {value!r}, expected one of {Variant.ALL}")
        return value


class ContextOverflow(ValueError):
    """Even a single context event plus the guidance exceeds the budget."""


@dataclass(frozen=True)
class PromptSpec:
    variant: str
    context: tuple[Event, ...]
    guidance: Optional[str] = None

    def __post_init__(self) -> None:
        if (self.guidance is None) != (self.variant == Variant.ELM):
            raise ValueError("guidance must be absent exactly for the unguided variant")
        if not self.context:
            raise ValueError("context must be non-empty")


@dataclass(frozen=True)
class DecodeConfig:
    max_input_tokens: int = 512
    max_output_tokens: int = 50
    beam_size: int = 4
    num_samples: int = 1
    random_seed: int = 0

    def __post_init__(self) -> None:
        for name in ("max_input_tokens", "max_output_tokens", "beam_size", "num_samples"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")


def assemble_input(
    event_texts: list[str],
    guidance: Optional[str],
    cfg: DecodeConfig,
    tokenizer: Tokenizer = whitespace_token_count,
) -> str:
    """Join event texts and optional guidance, dropping whole events from the
    front until the token budget is met. The guidance is never shortened."""
    suffix = "" if guidance is None else GUIDANCE_SEPARATOR + guidance
    for start in range(len(event_texts)):
        candidate = EVENT_JOINER.join(event_texts[start:]) + suffix
        if tokenizer(candidate) <= cfg.max_input_tokens:
            return candidate
    raise ContextOverflow(
        f"single event plus guidance exceeds {cfg.max_input_tokens} tokens"
    )


def format_input(
    spec: PromptSpec,
    cfg: DecodeConfig = DecodeConfig(),
    tokenizer: Tokenizer = whitespace_token_count,
) -> str:
    return assemble_input(
        [serialize_event(e) for e in spec.context], spec.guidance, cfg, tokenizer
    )


def instance_guidance(instance: CQAInstance, variant: str) -> Optional[str]:
    """What an instance contributes after the separator for a variant."""
    if variant == Variant.ELM:
        return None
    if variant == Variant.QGELM:
        return instance.question.surface
    # Entity-guided: the mention from the question; generic questions carry
    # no entity and degrade to an empty guidance string.
    if instance.question.kind is QuestionKind.GENERIC or instance.question.entity is None:
        return ""
    return instance.question.entity.text


def instance_prompt(
    instance: CQAInstance,
    variant: str,
    cfg: DecodeConfig = DecodeConfig(),
    tokenizer: Tokenizer = whitespace_token_count,
) -> str:
    return assemble_input(
        [serialize_event(e) for e in instance.context],
        instance_guidance(instance, variant),
        cfg,
        tokenizer,
    )


def score_sequence(
    backend: GeneratorBackend, input_text: str, output_text: str
) -> tuple[float, list[float]]:
    """Total and per-token log-probability of the output under the backend."""
    if not backend.supports("score"):
        raise BackendFailure(f"backend {backend.description!r} cannot score")
    if not output_text.split():
        return 0.0, []
    per_token = backend.score(input_text, output_text)
    return sum(per_token), per_token


def sample_events(
    backend: GeneratorBackend, input_text: str, n: int, cfg: DecodeConfig = DecodeConfig()
) -> list[str]:
    if not backend.supports("sample"):
        raise BackendFailure(f"backend {backend.description!r} cannot sample")
    if n <= 0:
        return []
    return backend.sample(input_text, n, cfg.random_seed, cfg.max_output_tokens)


def beam_events(
    backend: GeneratorBackend, input_text: str, cfg: DecodeConfig = DecodeConfig()
) -> list[str]:
    if not backend.supports("beam"):
        raise BackendFailure(f"backend {backend.description!r} cannot beam-decode")
    ranked = backend.beam(input_text, cfg.beam_size, cfg.max_output_tokens)
    return [text for text, _ in ranked]


def export_training_file(
    instances: list[CQAInstance],
    variant: str,
    path: str | Path,
    cfg: DecodeConfig = DecodeConfig(),
) -> int:
    """Write {input, target} JSONL for external fine-tuning; returns the
    number of rows written."""
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for instance in instances:
            row = {
                "input": instance_prompt(instance, variant, cfg),
                "target": serialize_event(instance.answer),
            }
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")
            count += 1
    return count
