"""Corpus-level BLEU over token-id sequences.

Plain BLEU-4: clipped n-gram counts pooled over the corpus, geometric mean
of the four precisions, multiplicative brevity penalty. No smoothing: any
zero pooled precision short-circuits to score 0, with the precisions still
reported.
"""

from __future__ import annotations

import collections
import math
from dataclasses import dataclass

MAX_ORDER = 4


@dataclass(frozen=True)
class BleuScore:
    score: float                     # 0..100
    precisions: tuple[float, ...]    # p_1..p_4, each 0..1
    brevity_penalty: float
    hyp_length: int
    ref_length: int


def _ngrams(seq, n):
    return collections.Counter(tuple(seq[i : i + n]) for i in range(len(seq) - n + 1))


def bleu_corpus(hypotheses: list, references: list) -> BleuScore:
    if not hypotheses:
        raise ValueError("empty hypothesis set")
    if len(hypotheses) != len(references):
        raise ValueError(
            f"{len(hypotheses)} hypotheses vs {len(references)} references"
        )

    matched = [0] * MAX_ORDER
    total = [0] * MAX_ORDER
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp = tuple(hyp)
        ref = tuple(ref)
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, MAX_ORDER + 1):
            hyp_counts = _ngrams(hyp, n)
            ref_counts = _ngrams(ref, n)
            total[n - 1] += max(len(hyp) - n + 1, 0)
            matched[n - 1] += sum(
                min(c, ref_counts.get(g, 0)) for g, c in hyp_counts.items()
            )

    precisions = tuple(m / t if t > 0 else 0.0 for m, t in zip(matched, total))
    bp = 1.0 if hyp_len > ref_len else math.exp(1 - ref_len / hyp_len) if hyp_len > 0 else 0.0

    if any(p == 0.0 for p in precisions):
        score = 0.0
    else:
        score = bp * math.exp(math.fsum(math.log(p) for p in precisions) / MAX_ORDER) * 100.0
    return BleuScore(score, precisions, bp, hyp_len, ref_len)
