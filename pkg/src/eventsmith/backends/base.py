"""Abstract contract every generator backend implements.

A backend is a conditional text generator/scorer over event texts. The
shipped reference implementation is an n-gram model; neural systems attach
through the same surface, in-process or over the pipe protocol in
`eventsmith.backends.remote`.
"""

from __future__ import annotations

from abc import ABC, abstractmethod


class BackendFailure(RuntimeError):
    """A backend call could not be completed."""


class GeneratorBackend(ABC):
    """Conditional event generator and scorer.

    Capabilities advertise which of score/sample/beam the backend supports.
    `exclusive` backends accept one client at a time; all others must allow
    concurrent read-only calls once constructed.
    """

    capabilities: frozenset[str] = frozenset()
    description: str = ""
    exclusive: bool = False

    def supports(self, capability: str) -> bool:
        return capability in self.capabilities

    @abstractmethod
    def score(self, input_text: str, output_text: str) -> list[float]:
        """Per-token log-probabilities of the output tokens, left to right.

        Values must be finite; the total is their sum.
        """

    @abstractmethod
    def sample(self, input_text: str, n: int, seed: int, max_tokens: int) -> list[str]:
        """n sampled event texts, reproducible for a fixed seed.

        Successive prefixes must be stable: sample(n=k) equals the first k
        entries of sample(n=m) for k <= m under the same seed.
        """

    @abstractmethod
    def beam(self, input_text: str, beam_size: int, max_tokens: int) -> list[tuple[str, float]]:
        """Up to beam_size (event text, score) pairs, best first."""
