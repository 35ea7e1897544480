"""Parallel corpus ingestion, source-token frequency indexing, and pivot sampling.

Sentences are stored as token-id sequences against a fixed vocabulary.
All sampling is seeded and platform-stable so a run can be reproduced
exactly from its recorded configuration.
"""

from __future__ import annotations

import collections
import random
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CorpusError, SelectionError


@dataclass(frozen=True)
class VocabEntry:
    id: int
    surface: str
    special: bool = False


class Vocab:
    """Ordered vocabulary with dense ids and a special-token flag.

    Special entries (padding, delimiters, unknown) are never eligible as
    pivots or as substitution candidates.
    """

    def __init__(self, entries: list[VocabEntry]):
        for i, e in enumerate(entries):
            if e.id != i:
                raise CorpusError(f"vocabulary ids must be dense 0..n-1, got {e.id} at row {i}")
        surfaces = [e.surface for e in entries]
        if len(set(surfaces)) != len(surfaces):
            raise CorpusError("vocabulary surface strings must be unique")
        self.entries = entries
        self._by_surface = {e.surface: e.id for e in entries}
        self.special_ids = frozenset(e.id for e in entries if e.special)

    @property
    def size(self) -> int:
        return len(self.entries)

    def lookup(self, surface: str) -> int | None:
        return self._by_surface.get(surface)

    def surface(self, token: int) -> str:
        return self.entries[token].surface

    def is_special(self, token: int) -> bool:
        return token in self.special_ids

    def substitutable(self) -> list[int]:
        """All non-special token ids, ascending."""
        return [e.id for e in self.entries if not e.special]

    @classmethod
    def load(cls, path: Path | str) -> "Vocab":
        """Read a vocabulary file: one ``id<TAB>surface<TAB>special_flag`` per line."""
        entries = []
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise CorpusError(f"{path}:{lineno}: expected 3 tab-separated fields")
            tid, surface, flag = parts
            entries.append(VocabEntry(int(tid), surface, flag in ("1", "true", "True")))
        return cls(entries)

    def save(self, path: Path | str) -> None:
        lines = [f"{e.id}\t{e.surface}\t{1 if e.special else 0}" for e in self.entries]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class SentencePair:
    id: int
    source: tuple[int, ...]
    target: tuple[int, ...]


@dataclass
class ParallelCorpus:
    pairs: list[SentencePair]
    source_vocab: Vocab
    target_vocab: Vocab
    direction: str
    dropped_too_long: int = 0
    dropped_empty: int = 0
    unknown_tokens: int = 0


def _encode_line(line: str, vocab: Vocab, unk_id: int | None) -> tuple[list[int], int]:
    ids, unknown = [], 0
    for surface in line.split():
        tid = vocab.lookup(surface)
        if tid is None:
            if unk_id is None:
                raise CorpusError(
                    f"unknown surface form {surface!r} and no unknown token in vocabulary"
                )
            tid = unk_id
            unknown += 1
        ids.append(tid)
    return ids, unknown


def load_parallel_corpus(
    source_file: Path | str,
    target_file: Path | str,
    source_vocab_file: Path | str,
    target_vocab_file: Path | str,
    max_len: int = 128,
    direction: str = "src→tgt",
    unk_surface: str = "<unk>",
) -> ParallelCorpus:
    """Load aligned one-sentence-per-line files into a token-id corpus.

    Pairs whose source exceeds ``max_len`` tokens are dropped and counted.
    Unknown surface forms map to the ``unk_surface`` entry and are tallied;
    mismatched line counts are a hard error. Pair ids are input line numbers.
    """
    src_vocab = Vocab.load(source_vocab_file)
    tgt_vocab = Vocab.load(target_vocab_file)
    src_lines = Path(source_file).read_text(encoding="utf-8").splitlines()
    tgt_lines = Path(target_file).read_text(encoding="utf-8").splitlines()
    if len(src_lines) != len(tgt_lines):
        raise CorpusError(
            f"line count mismatch: {len(src_lines)} source vs {len(tgt_lines)} target"
        )

    src_unk = src_vocab.lookup(unk_surface)
    tgt_unk = tgt_vocab.lookup(unk_surface)
    corpus = ParallelCorpus([], src_vocab, tgt_vocab, direction)
    for i, (sline, tline) in enumerate(zip(src_lines, tgt_lines)):
        src, n_unk_s = _encode_line(sline, src_vocab, src_unk)
        tgt, n_unk_t = _encode_line(tline, tgt_vocab, tgt_unk)
        corpus.unknown_tokens += n_unk_s + n_unk_t
        if not src or not tgt:
            corpus.dropped_empty += 1
            continue
        if len(src) > max_len:
            corpus.dropped_too_long += 1
            continue
        corpus.pairs.append(SentencePair(i, tuple(src), tuple(tgt)))
    return corpus


class FrequencyIndex:
    """Exact source-side occurrence counts with per-token postings."""

    def __init__(self, counts: dict[int, int], postings: dict[int, list[tuple[int, int]]]):
        self.counts = counts
        self.postings = postings

    def count(self, token: int) -> int:
        return self.counts.get(token, 0)

    def single_occurrence_sentences(self, token: int) -> list[tuple[int, int]]:
        """(sentence id, position) for sentences holding the token exactly once."""
        per_sentence = collections.Counter(sid for sid, _ in self.postings.get(token, ()))
        return [(sid, pos) for sid, pos in self.postings.get(token, ()) if per_sentence[sid] == 1]


def build_frequency_index(corpus: ParallelCorpus) -> FrequencyIndex:
    counts: dict[int, int] = collections.defaultdict(int)
    postings: dict[int, list[tuple[int, int]]] = collections.defaultdict(list)
    for pair in corpus.pairs:
        for pos, token in enumerate(pair.source):
            counts[token] += 1
            postings[token].append((pair.id, pos))
    return FrequencyIndex(dict(counts), dict(postings))


@dataclass(frozen=True)
class PivotSentence:
    sentence: SentencePair
    position: int
    pivot: int

    def __post_init__(self):
        if self.sentence.source[self.position] != self.pivot:
            raise SelectionError("pivot token does not sit at the stated position")


def eligible_pivot_tokens(
    index: FrequencyIndex,
    vocab: Vocab,
    min_freq: int,
    max_freq: int,
    sentences_per_token: int,
) -> list[int]:
    """Tokens usable as pivots: non-special, frequency within [min_freq, max_freq],
    and enough single-occurrence sentences to sample from."""
    out = []
    for token in vocab.substitutable():
        c = index.count(token)
        if not (min_freq <= c <= max_freq):
            continue
        if len(index.single_occurrence_sentences(token)) < sentences_per_token:
            continue
        out.append(token)
    return out


def select_pivot_tokens(
    index: FrequencyIndex,
    vocab: Vocab,
    min_freq: int = 500,
    max_freq: int = 1500,
    count: int = 100,
    seed: int = 0,
    sentences_per_token: int = 30,
) -> list[int]:
    """Seeded uniform sample (without replacement) of eligible pivot tokens.

    The result is sorted by token id so downstream iteration order is fixed.
    """
    if count < 1:
        raise SelectionError("count must be >= 1")
    if min_freq > max_freq:
        raise SelectionError("min_freq must not exceed max_freq")
    eligible = eligible_pivot_tokens(index, vocab, min_freq, max_freq, sentences_per_token)
    if len(eligible) < count:
        raise SelectionError(
            f"only {len(eligible)} eligible pivot tokens, need {count}"
        )
    rng = random.Random(seed)
    return sorted(rng.sample(eligible, count))


def sample_pivot_sentences(
    corpus: ParallelCorpus,
    index: FrequencyIndex,
    pivot: int,
    count: int = 30,
    seed: int = 0,
) -> list[PivotSentence]:
    """Seeded sample of sentences where the pivot occurs exactly once."""
    pool = sorted(index.single_occurrence_sentences(pivot))
    if len(pool) < count:
        raise SelectionError(
            f"token {pivot} has only {len(pool)} single-occurrence sentences, need {count}"
        )
    by_id = {pair.id: pair for pair in corpus.pairs}
    rng = random.Random(seed)
    picked = sorted(rng.sample(pool, count))
    return [PivotSentence(by_id[sid], pos, pivot) for sid, pos in picked]
