"""Shared test machinery: an independent brute-force enumerator for synthetic
translator specs, random spec/sentence generators, and corpus file writers.

The enumerator deliberately re-derives every statistic from first principles
(linear rule scans, Counter-based tallies) so it shares no code path with the
package under test.
"""

from __future__ import annotations

import collections
import math
import random
from pathlib import Path

from transentropy.translator import SynthSpec

# ------------------------------------------------------------- enumerator


def oracle_translate(spec: SynthSpec, seq) -> tuple[int, ...]:
    out = []
    for idx, tok in enumerate(seq):
        if tok in spec.drop:
            continue
        group = spec.groups[tok]
        if idx > 0:
            for rtok, left, g in spec.context_rules:
                if rtok == tok and left == seq[idx - 1]:
                    group = g
                    break
        out.append(spec.emissions[group])
    return tuple(out)


def oracle_subgroup(spec: SynthSpec, seq, pos) -> set[int]:
    """Replacements at pos preserving the translation, excluding the pivot
    and special tokens."""
    seq = list(seq)
    pivot = seq[pos]
    reference = oracle_translate(spec, seq)
    members = set()
    for t in range(spec.source_vocab_size):
        if t == pivot or t in spec.special_tokens:
            continue
        seq[pos] = t
        if oracle_translate(spec, seq) == reference:
            members.add(t)
    seq[pos] = pivot
    return members


def oracle_pivot_stats(spec: SynthSpec, sentences, keep=24, beta_c=5.0):
    """Full per-pivot statistics from scratch.

    sentences: list of (sentence id, token sequence, pivot position).
    Returns dict with subgroup sizes, avg size, counts, n_av, entropies.
    """
    subgroups = []
    for sid, seq, pos in sentences:
        subgroups.append((sid, oracle_subgroup(spec, seq, pos)))

    sizes = [len(m) for _, m in subgroups]
    avg_size = sum(sizes) / len(sizes)

    kept = sorted(subgroups, key=lambda x: (len(x[1]), x[0]))[:keep]
    counts = collections.Counter()
    for _, members in kept:
        counts.update(members)

    n_av = sum(counts.values())

    def entropy(threshold):
        total = 0.0
        for c in counts.values():
            if c > threshold:
                p = c / keep
                total += -p * math.log2(p)
        return total

    return {
        "sizes": sizes,
        "avg_size": avg_size,
        "counts": dict(counts),
        "n_av": n_av,
        "entropy_raw": entropy(0.0),
        "entropy_thresholded": entropy(beta_c),
    }


def oracle_pair_count(spec: SynthSpec, seq, j_a, j_b, members_a, members_b) -> int:
    seq = list(seq)
    reference = oracle_translate(spec, seq)
    count = 0
    for t_a in members_a:
        for t_b in members_b:
            seq[j_a], seq[j_b] = t_a, t_b
            if oracle_translate(spec, seq) == reference:
                count += 1
    return count


# ------------------------------------------------------------- generators


def random_spec(rng: random.Random, vocab_size=None, n_rules=None, n_drops=None,
                n_specials=0) -> SynthSpec:
    n_src = vocab_size or rng.randint(60, 200)
    tokens = list(range(n_src))
    rng.shuffle(tokens)

    groups = [0] * n_src
    gid = 0
    i = 0
    while i < len(tokens):
        size = rng.choice([1, 1, 2, 2, 3, 4, 6])
        for tok in tokens[i : i + size]:
            groups[tok] = gid
        gid += 1
        i += size

    n_tgt = gid + rng.randint(1, 10)
    emissions = rng.sample(range(n_tgt), gid)

    if n_drops is None:
        n_drops = rng.randint(0, 2)
    drop = set(rng.sample(range(n_src), n_drops)) if n_drops else set()

    if n_rules is None:
        n_rules = rng.randint(0, 8)
    rules = []
    for _ in range(n_rules):
        rules.append((rng.randrange(n_src), rng.randrange(n_src), rng.randrange(gid)))

    specials = set(rng.sample(range(n_src), n_specials)) if n_specials else set()
    spec = SynthSpec(n_src, n_tgt, groups, emissions, drop, rules, specials)
    spec.validate()
    return spec


def random_pivot_sentences(rng: random.Random, spec: SynthSpec, pivot: int,
                           count=30, length=(5, 9), start_id=0):
    """(sentence id, sequence, pivot position) tuples with the pivot exactly once."""
    others = [t for t in range(spec.source_vocab_size)
              if t != pivot and t not in spec.special_tokens]
    out = []
    for i in range(count):
        n = rng.randint(*length)
        seq = [rng.choice(others) for _ in range(n)]
        pos = rng.randrange(n)
        seq[pos] = pivot
        out.append((start_id + i, tuple(seq), pos))
    return out


def choose_pivots(rng: random.Random, spec: SynthSpec, count: int) -> list[int]:
    eligible = [t for t in range(spec.source_vocab_size) if t not in spec.special_tokens]
    return sorted(rng.sample(eligible, count))


# ------------------------------------------------------------- corpus files


def write_corpus_files(tmp_path: Path, spec: SynthSpec, sentences_by_pivot: dict):
    """Materialize a parallel corpus + vocab files for CLI runs.

    sentences_by_pivot maps pivot token -> list of (sid, seq, pos); sentence
    ids must be globally unique and dense in file order.
    """
    all_sentences = []
    for sents in sentences_by_pivot.values():
        all_sentences.extend(sents)
    all_sentences.sort(key=lambda x: x[0])
    assert [sid for sid, _, _ in all_sentences] == list(range(len(all_sentences)))

    src_lines = [" ".join(f"s{t}" for t in seq) for _, seq, _ in all_sentences]
    tgt_lines = [
        " ".join(f"t{t}" for t in oracle_translate(spec, seq)) or "t0"
        for _, seq, _ in all_sentences
    ]
    src_vocab = "\n".join(
        f"{i}\ts{i}\t{1 if i in spec.special_tokens else 0}"
        for i in range(spec.source_vocab_size)
    )
    tgt_vocab = "\n".join(f"{i}\tt{i}\t0" for i in range(spec.target_vocab_size))

    paths = {
        "source_file": tmp_path / "corpus.src",
        "target_file": tmp_path / "corpus.tgt",
        "source_vocab_file": tmp_path / "vocab.src",
        "target_vocab_file": tmp_path / "vocab.tgt",
        "synth_spec": tmp_path / "spec.json",
    }
    paths["source_file"].write_text("\n".join(src_lines) + "\n", encoding="utf-8")
    paths["target_file"].write_text("\n".join(tgt_lines) + "\n", encoding="utf-8")
    paths["source_vocab_file"].write_text(src_vocab + "\n", encoding="utf-8")
    paths["target_vocab_file"].write_text(tgt_vocab + "\n", encoding="utf-8")
    paths["synth_spec"].write_text(spec.to_json(), encoding="utf-8")
    return {k: str(v) for k, v in paths.items()}
