"""Scripted backends with closed-form behavior for metric tests."""

from __future__ import annotations

import hashlib

from eventsmith.backends.base import GeneratorBackend
from eventsmith.generation import GUIDANCE_SEPARATOR


def guidance_of(input_text: str) -> str:
    if GUIDANCE_SEPARATOR in input_text:
        return input_text.rsplit(GUIDANCE_SEPARATOR, 1)[1]
    return ""


def entity_of(input_text: str) -> str:
    """Recover the entity from a question or entity guidance."""
    guidance = guidance_of(input_text)
    if guidance.startswith("what else did ") and guidance.endswith(" do?"):
        return guidance[len("what else did ") : -len(" do?")]
    if guidance.startswith("what else happened to ") and guidance.endswith("?"):
        return guidance[len("what else happened to ") : -1]
    if guidance == "what else happened?":
        return ""
    return guidance


class EchoBackend(GeneratorBackend):
    """Always emits the requested entity as the actor of a fixed verb."""

    capabilities = frozenset({"sample", "beam", "score"})
    description = "echo"

    def sample(self, input_text, n, seed, max_tokens):
        entity = entity_of(input_text) or "someone"
        return [f"{entity} acted" for _ in range(n)]

    def beam(self, input_text, beam_size, max_tokens):
        entity = entity_of(input_text) or "someone"
        return [(f"{entity} acted", -float(i)) for i in range(beam_size)]

    def score(self, input_text, output_text):
        return [0.0] * len(output_text.split())


class SuppressorBackend(GeneratorBackend):
    """Never emits entity tokens or pronouns."""

    capabilities = frozenset({"sample", "beam", "score"})
    description = "suppressor"

    def sample(self, input_text, n, seed, max_tokens):
        return ["nothing happened at all" for _ in range(n)]

    def beam(self, input_text, beam_size, max_tokens):
        return [("nothing happened at all", -float(i)) for i in range(beam_size)]

    def score(self, input_text, output_text):
        return [-1.0] * len(output_text.split())


class ConstantBackend(GeneratorBackend):
    """One fixed event forever; maximally undiverse."""

    capabilities = frozenset({"sample", "beam", "score"})
    description = "constant"

    def __init__(self, text: str = "the clock ticked on") -> None:
        self.text = text

    def sample(self, input_text, n, seed, max_tokens):
        return [self.text for _ in range(n)]

    def beam(self, input_text, beam_size, max_tokens):
        return [(self.text, 0.0)]

    def score(self, input_text, output_text):
        return [0.0] * len(output_text.split())


class SlateBackend(GeneratorBackend):
    """Deterministic distinct candidates derived from (seed, slot); used for
    session golden runs where replay must reproduce candidates exactly."""

    capabilities = frozenset({"sample", "beam", "score"})
    description = "slate"

    def sample(self, input_text, n, seed, max_tokens):
        return [f"event {seed % 9973} {i}" for i in range(n)]

    def beam(self, input_text, beam_size, max_tokens):
        return [(f"event beam {i}", -float(i)) for i in range(beam_size)]

    def score(self, input_text, output_text):
        return [-1.0] * len(output_text.split())


class GoldScorer(GeneratorBackend):
    """Scores the designated gold output far above everything else."""

    capabilities = frozenset({"score"})
    description = "gold oracle"

    def __init__(self, gold_by_prompt: dict[str, str]) -> None:
        self.gold_by_prompt = gold_by_prompt

    def score(self, input_text, output_text):
        n = max(1, len(output_text.split()))
        if self.gold_by_prompt.get(input_text) == output_text:
            return [0.0] * n
        return [-1000.0 / n] * n

    def sample(self, input_text, n, seed, max_tokens):
        raise NotImplementedError

    def beam(self, input_text, beam_size, max_tokens):
        raise NotImplementedError


class HashScorer(GeneratorBackend):
    """Deterministic pseudo-random scorer: the total score of a candidate is
    a uniform function of (input, output, salt), so the best of six
    candidates is uniform among them."""

    capabilities = frozenset({"score"})
    description = "hash scorer"

    def __init__(self, salt: int = 0) -> None:
        self.salt = salt

    def score(self, input_text, output_text):
        digest = hashlib.sha256(
            f"{self.salt}\x1f{input_text}\x1f{output_text}".encode()
        ).digest()
        value = int.from_bytes(digest[:8], "big") / 2**64  # [0, 1)
        n = max(1, len(output_text.split()))
        return [(-1.0 - value) / n] * n

    def sample(self, input_text, n, seed, max_tokens):
        raise NotImplementedError

    def beam(self, input_text, beam_size, max_tokens):
        raise NotImplementedError
