"""Sequence-modeling quality: per-token perplexity, with or without the
guidance marginalized out, and the narrative cloze task.

Marginalization treats the applicable questions as equally likely and
averages the sequence probabilities: P(e | C) = (1/|Q|) * sum_q P(e | q, C).
For the question-guided variant the applicable set holds both role questions
for every argument of the most recent context event plus the generic
question; for the entity-guided variant it is the argument set itself.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Optional

from ..backends.base import GeneratorBackend
from ..events import (
    CQAInstance,
    Event,
    agent_question,
    entity_mention,
    generic_question,
    normalize,
    serialize_event,
    theme_question,
)
from ..generation import (
    DecodeConfig,
    Variant,
    assemble_input,
    instance_prompt,
    score_sequence,
)


class EmptyQuestionSet(ValueError):
    """No question can be formed for the most recent context event."""


class TooFewDocuments(ValueError):
    """Cloze confounders must come from other documents."""


@dataclass(frozen=True)
class PerplexityReport:
    mode: str  # "guided" or "marginalized"
    per_token_ppl: float
    cloze_accuracy: Optional[float]
    num_instances: int

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "per_token_ppl": self.per_token_ppl,
            "cloze_accuracy": self.cloze_accuracy,
            "num_instances": self.num_instances,
        }


def event_arguments(event: Event) -> list[str]:
    """Non-empty arguments of a tuple, deduplicated, subject first."""
    seen: set[str] = set()
    args: list[str] = []
    for candidate in (event.subject, event.object):
        key = normalize(candidate)
        if key and key not in seen:
            seen.add(key)
            args.append(candidate)
    return args


def applicable_guidances(
    instance: CQAInstance, variant: str, include_generic: bool = True
) -> list[Optional[str]]:
    """The guidance strings to marginalize over for one instance."""
    if variant == Variant.ELM:
        return [None]
    args = event_arguments(instance.context[-1])
    if variant == Variant.EGELM:
        if not args:
            raise EmptyQuestionSet("most recent event has no arguments to condition on")
        return list(args)
    guidances: list[Optional[str]] = []
    for arg in args:
        mention = entity_mention(arg)
        guidances.append(agent_question(mention).surface)
        guidances.append(theme_question(mention).surface)
    if include_generic:
        guidances.append(generic_question().surface)
    if not guidances:
        raise EmptyQuestionSet(
            "most recent event has no arguments and the generic question is disabled"
        )
    return guidances


def _logsumexp(values: list[float]) -> float:
    top = max(values)
    if math.isinf(top):
        return top
    return top + math.log(sum(math.exp(v - top) for v in values))


def marginalized_logprob(
    backend: GeneratorBackend,
    instance: CQAInstance,
    variant: str,
    cfg: DecodeConfig = DecodeConfig(),
    include_generic: bool = True,
) -> tuple[float, list[float]]:
    """Log of the uniform mixture of the answer's sequence probability over
    the applicable guidances; also returns the per-guidance totals."""
    guidances = applicable_guidances(instance, variant, include_generic)
    context_texts = [serialize_event(e) for e in instance.context]
    answer_text = serialize_event(instance.answer)
    totals = [
        score_sequence(backend, assemble_input(context_texts, guidance, cfg), answer_text)[0]
        for guidance in guidances
    ]
    if len(totals) == 1:
        return totals[0], totals
    return _logsumexp(totals) - math.log(len(totals)), totals


def perplexity(
    backend: GeneratorBackend,
    instances: list[CQAInstance],
    mode: str,
    variant: str,
    cfg: DecodeConfig = DecodeConfig(),
    include_generic: bool = True,
) -> PerplexityReport:
    """Corpus-level per-token perplexity of the gold answers."""
    if not instances:
        raise ValueError("need at least one instance")
    if mode not in ("guided", "marginalized"):
        raise ValueError(f"unknown mode {mode!r}")

    total_logprob = 0.0
    total_tokens = 0
    for instance in instances:
        answer_text = serialize_event(instance.answer)
        n_tokens = len(answer_text.split())
        if mode == "guided":
            prompt = instance_prompt(instance, variant, cfg)
            logprob, _ = score_sequence(backend, prompt, answer_text)
        else:
            logprob, _ = marginalized_logprob(backend, instance, variant, cfg, include_generic)
        total_logprob += logprob
        total_tokens += n_tokens

    ppl = math.exp(-total_logprob / total_tokens)
    return PerplexityReport(
        mode=mode,
        per_token_ppl=ppl,
        cloze_accuracy=None,
        num_instances=len(instances),
    )


def narrative_cloze(
    backend: GeneratorBackend,
    instances: list[CQAInstance],
    variant: str,
    confounders: int = 5,
    seed: int = 0,
    cfg: DecodeConfig = DecodeConfig(),
) -> float:
    """Accuracy of picking the gold answer over confounders from other
    documents, one probe per document. Ties count as incorrect."""
    by_document: dict[str, list[CQAInstance]] = {}
    for instance in instances:
        by_document.setdefault(instance.document_id, []).append(instance)
    if len(by_document) < 2:
        raise TooFewDocuments("cloze needs instances from at least two documents")

    rng = random.Random(seed)
    correct = 0
    document_ids = list(by_document)
    for document_id in document_ids:
        probe = rng.choice(by_document[document_id])
        distractors = []
        while len(distractors) < confounders:
            candidate = rng.choice(instances)
            if candidate.document_id != document_id:
                distractors.append(candidate)
        prompt = instance_prompt(probe, variant, cfg)
        gold_score, _ = score_sequence(backend, prompt, serialize_event(probe.answer))
        confounder_scores = [
            score_sequence(backend, prompt, serialize_event(d.answer))[0]
            for d in distractors
        ]
        if gold_score > max(confounder_scores):
            correct += 1
    return 100.0 * correct / len(document_ids)
