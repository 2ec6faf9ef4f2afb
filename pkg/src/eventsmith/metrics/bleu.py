"""Self-BLEU diversity scoring.

No smoothing is applied anywhere: a hypothesis with zero n-gram overlap
scores 0, identical hypotheses score 100. Orders the hypothesis is too short
to produce (a 2-token text has no trigrams) are left out of the geometric
mean instead of being counted as zero, so identical short texts still score
100.
"""

from __future__ import annotations

import math
from collections import Counter
from statistics import fmean


class TooFewSequences(ValueError):
    """Self-BLEU needs at least two sequences."""


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu_score(hypothesis: str, references: list[str], max_n: int = 3) -> float:
    """Multi-reference BLEU in [0, 100] with uniform n-gram weights and the
    standard brevity penalty (closest reference length, shorter on ties)."""
    hyp_tokens = hypothesis.split()
    ref_token_lists = [ref.split() for ref in references]
    if not hyp_tokens or not ref_token_lists:
        return 0.0

    log_precisions: list[float] = []
    for n in range(1, max_n + 1):
        hyp_counts = _ngrams(hyp_tokens, n)
        total = sum(hyp_counts.values())
        if total == 0:
            continue  # hypothesis too short for this order
        clipped = 0
        for ngram, count in hyp_counts.items():
            best_ref = max(_ngrams(ref, n).get(ngram, 0) for ref in ref_token_lists)
            clipped += min(count, best_ref)
        if clipped == 0:
            return 0.0
        log_precisions.append(math.log(clipped / total))

    if not log_precisions:
        return 0.0
    geo_mean = math.exp(fmean(log_precisions))

    c = len(hyp_tokens)
    r = min((abs(len(ref) - c), len(ref)) for ref in ref_token_lists)[1]
    brevity = 1.0 if c > r else math.exp(1.0 - r / c)
    return 100.0 * brevity * geo_mean


def self_bleu(sequences: list[str], max_n: int = 3) -> float:
    """Mean BLEU of each sequence against all the others."""
    if len(sequences) < 2:
        raise TooFewSequences(f"need at least 2 sequences, got {len(sequences)}")
    scores = []
    for i, hypothesis in enumerate(sequences):
        references = sequences[:i] + sequences[i + 1 :]
        scores.append(bleu_score(hypothesis, references, max_n))
    return fmean(scores)
