"""Controllability: does a requested entity (optionally in a requested role)
show up among the generated candidates within a fixed budget?

Both the coreference provider and the role tagger are deliberately
lightweight and pluggable; stronger external tooling can be dropped in
without touching the protocol.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import fmean
from typing import Callable, Optional

from ..backends.base import GeneratorBackend
from ..events import (
    Event,
    Role,
    agent_question,
    contains_phrase,
    entity_mention,
    normalize,
    serialize_event,
    theme_question,
)
from ..generation import DecodeConfig, Variant, assemble_input

PRONOUNS = (
    "he", "she", "it", "they",
    "him", "her", "them",
    "his", "hers", "its", "their", "theirs",
)


class DictionaryCoref:
    """Exact-match plus pronoun-dictionary coreference.

    An optional cluster table links alias surface forms ("the thief" and
    "the suspect"). Without a table entry, a pronoun in the generated text is
    taken as coreferent with the entity whenever the entity itself already
    occurred in the history, which is the cheap stand-in for running a real
    coreference system over history + generation.
    """

    def __init__(self, clusters: Optional[list[set[str]]] = None) -> None:
        self.clusters = [{normalize(m) for m in cluster} for cluster in (clusters or [])]

    def linked(self, generated: str, entity: str, history: str) -> bool:
        target = normalize(entity)
        for cluster in self.clusters:
            if target in cluster:
                for alias in cluster:
                    if alias != target and contains_phrase(generated, alias):
                        return True
        if contains_phrase(history, entity):
            return any(contains_phrase(generated, pronoun) for pronoun in PRONOUNS)
        return False


def entity_presence(
    generated: str,
    history: str,
    entity: str,
    coref_provider: Optional[DictionaryCoref] = None,
) -> bool:
    """True when the generated event mentions the entity directly or through
    a mention the provider considers coreferent."""
    if not entity:
        raise ValueError("entity must be non-empty")
    if contains_phrase(generated, entity):
        return True
    provider = coref_provider if coref_provider is not None else DictionaryCoref()
    return provider.linked(generated, entity, history)


def matched_surface(
    generated: str,
    entity: str,
    history: str,
    coref_provider: Optional[DictionaryCoref] = None,
) -> Optional[str]:
    """The surface form through which the entity is present, if any."""
    if contains_phrase(generated, entity):
        return entity
    provider = coref_provider if coref_provider is not None else DictionaryCoref()
    target = normalize(entity)
    for cluster in provider.clusters:
        if target in cluster:
            for alias in cluster:
                if alias != target and contains_phrase(generated, alias):
                    return alias
    if contains_phrase(history, entity):
        for pronoun in PRONOUNS:
            if contains_phrase(generated, pronoun):
                return pronoun
    return None


def tuple_role_tagger(generated: str, surface: str) -> Optional[Role]:
    """Role of a mention inside a subject-first event text: a mention that
    opens the text is the actor, anything later is acted upon."""
    g = normalize(generated)
    s = normalize(surface)
    if not s or not contains_phrase(g, s):
        return None
    if g == s or g.startswith(s + " "):
        return Role.AGENT
    return Role.THEME


RoleTagger = Callable[[str, str], Optional[Role]]


@dataclass(frozen=True)
class ControlProbe:
    context: tuple[Event, ...]
    entity: str
    role: Optional[Role] = None


@dataclass(frozen=True)
class ControlReport:
    mode: str  # "beam" or "sampling"
    criterion: str  # "any_presence" or "role_specific"
    fail_pct: float
    avg_samples: Optional[float]
    num_probes: int
    budget: int

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "criterion": self.criterion,
            "fail_pct": self.fail_pct,
            "avg_samples": self.avg_samples,
            "num_probes": self.num_probes,
            "budget": self.budget,
        }


def probe_guidance(probe: ControlProbe, variant: str) -> Optional[str]:
    if variant == Variant.ELM:
        return None
    if variant == Variant.EGELM:
        return probe.entity
    mention = entity_mention(probe.entity)
    if probe.role is Role.THEME:
        return theme_question(mention).surface
    # role-less probes still need the entity in the prompt; the agentive
    # question is the canonical carrier
    return agent_question(mention).surface


def controllability_eval(
    backend: GeneratorBackend,
    probes: list[ControlProbe],
    mode: str,
    criterion: str,
    variant: str,
    budget: int = 40,
    cfg: DecodeConfig = DecodeConfig(),
    role_tagger: Optional[RoleTagger] = None,
    coref_provider: Optional[DictionaryCoref] = None,
) -> ControlReport:
    """Fail percentage and, for sampling, the mean 1-based index of the first
    hit among successful probes."""
    if not probes:
        raise ValueError("need at least one probe")
    if mode not in ("beam", "sampling"):
        raise ValueError(f"unknown mode {mode!r}")
    if criterion not in ("any_presence", "role_specific"):
        raise ValueError(f"unknown criterion {criterion!r}")
    tagger = role_tagger if role_tagger is not None else tuple_role_tagger

    failures = 0
    first_hits: list[int] = []
    for probe_index, probe in enumerate(probes):
        context_texts = [serialize_event(e) for e in probe.context]
        prompt = assemble_input(context_texts, probe_guidance(probe, variant), cfg)
        if mode == "sampling":
            candidates = backend.sample(
                prompt, budget, cfg.random_seed + probe_index, cfg.max_output_tokens
            )
        else:
            candidates = [
                text for text, _ in backend.beam(prompt, budget, cfg.max_output_tokens)
            ]
        hit: Optional[int] = None
        history_parts = list(context_texts)
        for i, candidate in enumerate(candidates):
            history = " . ".join(history_parts)
            if _passes(candidate, history, probe, criterion, tagger, coref_provider):
                hit = i + 1
                break
            history_parts.append(candidate)
        if hit is None:
            failures += 1
        else:
            first_hits.append(hit)

    avg_samples = fmean(first_hits) if mode == "sampling" and first_hits else None
    return ControlReport(
        mode=mode,
        criterion=criterion,
        fail_pct=100.0 * failures / len(probes),
        avg_samples=avg_samples,
        num_probes=len(probes),
        budget=budget,
    )


def _passes(
    candidate: str,
    history: str,
    probe: ControlProbe,
    criterion: str,
    tagger: RoleTagger,
    coref_provider: Optional[DictionaryCoref],
) -> bool:
    if not entity_presence(candidate, history, probe.entity, coref_provider):
        return False
    if criterion == "any_presence":
        return True
    if probe.role is None:
        raise ValueError("role_specific evaluation needs a probe role")
    surface = matched_surface(candidate, probe.entity, history, coref_provider)
    if surface is None:
        return False
    return tagger(candidate, surface) is probe.role
