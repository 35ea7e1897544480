"""Substitution sweeps: which replacement tokens preserve a generated translation.

The single-position sweep replaces the pivot token with every other
non-special vocabulary token and keeps those whose translation is
token-for-token identical to the pivot sentence's generated translation.
The pair sweep enumerates every combination of two subgroups at two
positions of the same sentence.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import PivotSentence, SentencePair, Vocab
from .translator import DecodeParams, Translation, Translator

# inputs per backend call; sweeps produce tens of thousands of variants
BATCH_SIZE = 1024


@dataclass(frozen=True)
class Subgroup:
    pivot: int
    sentence_id: int
    position: int
    members: frozenset[int]
    reference: Translation

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class SubgroupEnsemble:
    pivot: int
    subgroups: tuple[Subgroup, ...]

    @property
    def avg_size(self) -> float:
        return sum(sg.size for sg in self.subgroups) / len(self.subgroups)


@dataclass(frozen=True)
class PairDegeneracy:
    sentence_id: int
    positions: tuple[int, int]
    sg_a: int
    sg_b: int
    pair_count: int

    @property
    def ratio(self) -> float | None:
        """pair_count / (sg_a * sg_b); None when either subgroup is empty."""
        product = self.sg_a * self.sg_b
        if product == 0:
            return None
        return self.pair_count / product


def _translate_chunked(translator: Translator, inputs, params: DecodeParams):
    out = []
    for start in range(0, len(inputs), BATCH_SIZE):
        out.extend(translator.translate_batch(inputs[start : start + BATCH_SIZE], params))
    return out


def substitution_sweep(
    pivot_sentence: PivotSentence,
    vocab: Vocab,
    translator: Translator,
    params: DecodeParams,
) -> Subgroup:
    """Sweep every non-special replacement at the pivot position."""
    src = list(pivot_sentence.sentence.source)
    j = pivot_sentence.position
    pivot = pivot_sentence.pivot
    reference = translator.translate_batch([tuple(src)], params)[0]

    candidates = [t for t in vocab.substitutable() if t != pivot]
    variants = []
    for t in candidates:
        src[j] = t
        variants.append(tuple(src))
    src[j] = pivot

    outputs = _translate_chunked(translator, variants, params)
    members = frozenset(t for t, out in zip(candidates, outputs) if out == reference)
    return Subgroup(pivot, pivot_sentence.sentence.id, j, members, reference)


def sweep_ensemble(
    pivot: int,
    sentences: list[PivotSentence],
    vocab: Vocab,
    translator: Translator,
    params: DecodeParams,
) -> SubgroupEnsemble:
    subgroups = []
    for ps in sentences:
        if ps.pivot != pivot:
            raise ValueError(f"pivot mismatch: ensemble for {pivot}, sentence has {ps.pivot}")
        subgroups.append(substitution_sweep(ps, vocab, translator, params))
    return SubgroupEnsemble(pivot, tuple(subgroups))


def pair_sweep(
    sentence: SentencePair,
    j_a: int,
    j_b: int,
    sg_a: Subgroup,
    sg_b: Subgroup,
    translator: Translator,
    params: DecodeParams,
) -> PairDegeneracy:
    """Count replacement pairs (one from each subgroup) preserving the translation."""
    if j_a == j_b:
        raise ValueError("pair sweep positions must differ")
    if sg_a.sentence_id != sentence.id or sg_b.sentence_id != sentence.id:
        raise ValueError("subgroups were not computed on this sentence")
    if sg_a.reference != sg_b.reference:
        raise ValueError("subgroups disagree on the reference translation")

    if not sg_a.members or not sg_b.members:
        return PairDegeneracy(sentence.id, (j_a, j_b), sg_a.size, sg_b.size, 0)

    reference = sg_a.reference
    src = list(sentence.source)
    members_a = sorted(sg_a.members)
    members_b = sorted(sg_b.members)

    pair_count = 0
    variants = []
    for t_a in members_a:
        src[j_a] = t_a
        for t_b in members_b:
            src[j_b] = t_b
            variants.append(tuple(src))
        if len(variants) >= BATCH_SIZE * 8:
            outputs = _translate_chunked(translator, variants, params)
            pair_count += sum(1 for out in outputs if out == reference)
            variants = []
    if variants:
        outputs = _translate_chunked(translator, variants, params)
        pair_count += sum(1 for out in outputs if out == reference)

    return PairDegeneracy(sentence.id, (j_a, j_b), sg_a.size, sg_b.size, pair_count)
