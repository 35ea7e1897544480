"""Entropy statistics over subgroup ensembles.

Counts are exact integers throughout; only the final entropy terms use
floating point. A replacement token's probability is its kept-subgroup
membership count divided by the number of kept subgroups, so the family
of probabilities is deliberately unnormalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .degeneracy import Subgroup, SubgroupEnsemble


@dataclass(frozen=True)
class ReplacementDistribution:
    pivot: int
    kept: int
    counts: dict[int, int]  # replacement token -> membership count in 1..kept

    def probability(self, token: int) -> float:
        return self.counts.get(token, 0) / self.kept


@dataclass(frozen=True)
class TokenEntropyRecord:
    pivot: int
    avg_subgroup_size: float
    n_av: int
    entropy_raw: float
    entropy_thresholded: float
    beta_c: float
    surviving_tokens: int


@dataclass(frozen=True)
class EntropyHistogram:
    bin_width: float
    bins: dict[int, int]  # bin index k -> count in [k*w, (k+1)*w)

    @property
    def total(self) -> int:
        return sum(self.bins.values())


def select_smallest(ensemble: SubgroupEnsemble, keep: int = 24) -> list[Subgroup]:
    """The ``keep`` smallest subgroups; ties broken by ascending sentence id.

    Dropping the largest subgroups filters sentences where the translator
    ignores the pivot and nearly any replacement preserves the output.
    """
    if len(ensemble.subgroups) < keep:
        raise ValueError(
            f"ensemble has {len(ensemble.subgroups)} subgroups, need at least {keep}"
        )
    ordered = sorted(ensemble.subgroups, key=lambda sg: (sg.size, sg.sentence_id))
    return ordered[:keep]


def replacement_distribution(kept: list[Subgroup]) -> ReplacementDistribution:
    """Per-token membership counts across the kept subgroups."""
    if not kept:
        raise ValueError("kept subgroup list is empty")
    pivot = kept[0].pivot
    counts: dict[int, int] = {}
    for sg in kept:
        if sg.pivot != pivot:
            raise ValueError("subgroups with different pivots cannot be pooled")
        for token in sg.members:
            counts[token] = counts.get(token, 0) + 1
    return ReplacementDistribution(pivot, len(kept), counts)


def n_av(dist: ReplacementDistribution) -> int:
    """Total membership count, kept * sum(P_i); an exact integer by construction."""
    return sum(dist.counts.values())


def token_entropy(dist: ReplacementDistribution, beta_c: float) -> float:
    """-sum P_i log2 P_i over tokens with P_i strictly above beta_c / kept.

    With integer counts the strict threshold is exactly c_i > beta_c, so
    beta_c = 5 keeps tokens appearing in at least 6 of 24 subgroups;
    beta_c = 0 is the unthresholded entropy.
    """
    if beta_c < 0:
        raise ValueError("beta_c must be >= 0")
    kept = dist.kept
    terms = []
    for c in dist.counts.values():
        if c > beta_c:
            p = c / kept
            terms.append(-p * math.log2(p))
    return math.fsum(terms)


def surviving_tokens(dist: ReplacementDistribution, beta_c: float) -> int:
    return sum(1 for c in dist.counts.values() if c > beta_c)


def token_record(ensemble: SubgroupEnsemble, keep: int = 24, beta_c: float = 5.0) -> TokenEntropyRecord:
    """Full per-pivot statistics: kept subgroups, distribution, entropies."""
    kept = select_smallest(ensemble, keep)
    dist = replacement_distribution(kept)
    return TokenEntropyRecord(
        pivot=ensemble.pivot,
        avg_subgroup_size=ensemble.avg_size,
        n_av=n_av(dist),
        entropy_raw=token_entropy(dist, 0.0),
        entropy_thresholded=token_entropy(dist, beta_c),
        beta_c=beta_c,
        surviving_tokens=surviving_tokens(dist, beta_c),
    )


@dataclass(frozen=True)
class ModelEntropyReport:
    model_id: str
    direction: str
    records: tuple[TokenEntropyRecord, ...]  # sorted ascending by thresholded entropy
    s_all: float
    s_k: float
    k: int
    beta_c: float
    provenance: dict = field(default_factory=dict)


def model_report(
    model_id: str,
    direction: str,
    records: list[TokenEntropyRecord],
    k: int,
    beta_c: float,
    provenance: dict | None = None,
) -> ModelEntropyReport:
    ordered = tuple(sorted(records, key=lambda r: (r.entropy_thresholded, r.pivot)))
    s_all, s_k = aggregate([r.entropy_thresholded for r in ordered], k)
    return ModelEntropyReport(
        model_id, direction, ordered, s_all, s_k, k, beta_c, provenance or {}
    )


def aggregate(entropies: list[float], k: int) -> tuple[float, float]:
    """(mean of all, mean of the k smallest) per-pivot entropies."""
    if not (1 <= k <= len(entropies)):
        raise ValueError(f"k={k} out of range for {len(entropies)} records")
    ordered = sorted(entropies)
    s_all = math.fsum(ordered) / len(ordered)
    s_k = math.fsum(ordered[:k]) / k
    return s_all, s_k


def histogram(entropies: list[float], bin_width: float) -> EntropyHistogram:
    if bin_width <= 0:
        raise ValueError("bin width must be positive")
    bins: dict[int, int] = {}
    for s in entropies:
        k = int(s // bin_width)
        bins[k] = bins.get(k, 0) + 1
    return EntropyHistogram(bin_width, bins)
