"""Pipeline stages behind the CLI: pivot selection, sweeps with resume,
entropy reports, pair degeneracy, and cross-model ranking.

Each stage reads the previous stage's artifact, verifies the config digest,
and writes its own artifact atomically. The sweep stage checkpoints per
(pivot, sentence) unit so an interrupted run resumes without recomputation
and still produces a byte-identical final file.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import logging
from pathlib import Path

from . import corpus as corpus_mod
from . import entropy as entropy_mod
from .bleu import bleu_corpus
from .cache import CachingTranslator, TranslationCache
from .config import RunConfig, derive_seed
from .corpus import ParallelCorpus, PivotSentence, load_parallel_corpus
from .degeneracy import Subgroup, SubgroupEnsemble, pair_sweep, substitution_sweep
from .errors import ConfigError
from .reportio import canonical_json, meta_record, read_jsonl, write_csv, write_json, write_jsonl
from .translator import DecodeParams, HttpTranslator, SynthSpec, SyntheticTranslator

log = logging.getLogger(__name__)


def build_translator(config: RunConfig) -> CachingTranslator:
    if config.synth_spec is not None:
        inner = SyntheticTranslator(SynthSpec.load(config.synth_spec))
    else:
        inner = HttpTranslator(config.translator_url)
    cache = TranslationCache(config.cache) if config.cache else None
    return CachingTranslator(inner, cache)


def decode_params(config: RunConfig) -> DecodeParams:
    return DecodeParams(model_id=config.model_id, max_output_len=config.max_output_len)


def load_corpus(config: RunConfig) -> ParallelCorpus:
    return load_parallel_corpus(
        config.source_file,
        config.target_file,
        config.source_vocab_file,
        config.target_vocab_file,
        max_len=config.max_len,
        direction=config.direction,
    )


def _out(config: RunConfig, name: str) -> Path:
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir / name


def _check_digest(meta: dict, config: RunConfig, source: str) -> None:
    if meta.get("config_digest") != config.digest():
        raise ConfigError(
            f"{source} was produced by config {meta.get('config_digest')}, "
            f"current config is {config.digest()}; refusing to mix runs"
        )


# ---------------------------------------------------------------- pivots

def run_select_pivots(config: RunConfig) -> Path:
    corpus = load_corpus(config)
    index = corpus_mod.build_frequency_index(corpus)
    tokens = corpus_mod.select_pivot_tokens(
        index,
        corpus.source_vocab,
        min_freq=config.min_freq,
        max_freq=config.max_freq,
        count=config.pivot_count,
        seed=derive_seed(config.seed, "pivot-tokens"),
        sentences_per_token=config.sentences_per_token,
    )
    records = []
    for token in tokens:
        sentences = corpus_mod.sample_pivot_sentences(
            corpus,
            index,
            token,
            count=config.sentences_per_token,
            seed=derive_seed(config.seed, "pivot-sentences", token),
        )
        records.append(
            {
                "token": token,
                "surface": corpus.source_vocab.surface(token),
                "frequency": index.count(token),
                "sentences": [
                    {"id": ps.sentence.id, "position": ps.position} for ps in sentences
                ],
            }
        )
    path = _out(config, "pivots.jsonl")
    write_jsonl(path, meta_record(config.digest(), config.seed, direction=config.direction), records)
    return path


# ---------------------------------------------------------------- sweeps

def _subgroup_record(sg: Subgroup) -> dict:
    return {
        "pivot": sg.pivot,
        "sentence_id": sg.sentence_id,
        "position": sg.position,
        "member_ids": sorted(sg.members),
        "size": sg.size,
        "reference_output": list(sg.reference),
    }


def _record_subgroup(rec: dict) -> Subgroup:
    return Subgroup(
        rec["pivot"],
        rec["sentence_id"],
        rec["position"],
        frozenset(rec["member_ids"]),
        tuple(rec["reference_output"]),
    )


def run_sweep(config: RunConfig, pivots_path: Path | str | None = None,
              max_units: int | None = None) -> Path:
    """Sweep every (pivot, sentence) unit; resumable via the partial log.

    ``max_units`` stops after that many newly computed units (used to test
    interrupt/resume; operationally handy for smoke runs). The final file is
    only written once all units are complete.
    """
    pivots_path = Path(pivots_path or _out(config, "pivots.jsonl"))
    meta, pivot_records = read_jsonl(pivots_path)
    _check_digest(meta, config, str(pivots_path))

    corpus = load_corpus(config)
    by_id = {pair.id: pair for pair in corpus.pairs}
    translator = build_translator(config)
    vocab = translator.vocabulary("source")
    params = decode_params(config)

    units: list[PivotSentence] = []
    for rec in pivot_records:
        for s in rec["sentences"]:
            units.append(PivotSentence(by_id[s["id"]], s["position"], rec["token"]))

    partial_path = _out(config, "sweeps.partial.jsonl")
    done: dict[tuple[int, int], dict] = {}
    if partial_path.exists():
        pmeta, prev = read_jsonl(partial_path)
        _check_digest(pmeta, config, str(partial_path))
        for rec in prev:
            done[(rec["pivot"], rec["sentence_id"])] = rec
        log.info("resuming sweep: %d/%d units already done", len(done), len(units))

    pending = [u for u in units if (u.pivot, u.sentence.id) not in done]
    if max_units is not None:
        pending = pending[:max_units]

    partial_fh = open(partial_path, "a", encoding="utf-8")
    if not done and partial_fh.tell() == 0:
        partial_fh.write(canonical_json(meta_record(config.digest(), config.seed)) + "\n")
        partial_fh.flush()

    def work(unit: PivotSentence) -> Subgroup:
        return substitution_sweep(unit, vocab, translator, params)

    try:
        with concurrent.futures.ThreadPoolExecutor(max_workers=config.concurrency) as pool:
            for sg in pool.map(work, pending):
                rec = _subgroup_record(sg)
                done[(sg.pivot, sg.sentence_id)] = rec
                partial_fh.write(canonical_json(rec) + "\n")
                partial_fh.flush()
    finally:
        partial_fh.close()

    if len(done) < len(units):
        log.info("sweep incomplete: %d/%d units; rerun to finish", len(done), len(units))
        return partial_path

    records = [done[(u.pivot, u.sentence.id)] for u in units]
    records.sort(key=lambda r: (r["pivot"], r["sentence_id"]))
    path = _out(config, "sweeps.jsonl")
    write_jsonl(path, meta_record(config.digest(), config.seed, direction=config.direction), records)
    partial_path.unlink()
    return path


# ---------------------------------------------------------------- entropy

def _report_dict(report: entropy_mod.ModelEntropyReport) -> dict:
    return {
        "model_id": report.model_id,
        "direction": report.direction,
        "beta_c": report.beta_c,
        "k": report.k,
        "s": report.s_all,
        "s_k": report.s_k,
        "records": [dataclasses.asdict(r) for r in report.records],
        "provenance": report.provenance,
    }


def ensembles_from_sweeps(records: list[dict]) -> list[SubgroupEnsemble]:
    grouped: dict[int, list[Subgroup]] = {}
    for rec in records:
        grouped.setdefault(rec["pivot"], []).append(_record_subgroup(rec))
    return [SubgroupEnsemble(pivot, tuple(sgs)) for pivot, sgs in sorted(grouped.items())]


def run_entropy(config: RunConfig, sweeps_path: Path | str | None = None) -> Path:
    sweeps_path = Path(sweeps_path or _out(config, "sweeps.jsonl"))
    meta, sweep_records = read_jsonl(sweeps_path)
    _check_digest(meta, config, str(sweeps_path))

    ensembles = ensembles_from_sweeps(sweep_records)
    records = [
        entropy_mod.token_record(ens, keep=config.keep, beta_c=config.beta_c)
        for ens in ensembles
    ]
    provenance = {
        "config_digest": config.digest(),
        "seed": config.seed,
        "config": config.semantic_dict(),
    }
    report = entropy_mod.model_report(
        config.model_id, config.direction, records, config.k, config.beta_c, provenance
    )

    report_path = _out(config, "report.json")
    write_json(report_path, _report_dict(report))

    meta_out = meta_record(config.digest(), config.seed, direction=config.direction)
    write_csv(
        _out(config, "tables.csv"),
        meta_out,
        "k_lowest,entropy",
        [
            f"{len(records)},{report.s_all!r}",
            f"{config.k},{report.s_k!r}",
        ],
    )
    hist = entropy_mod.histogram(
        [r.entropy_thresholded for r in records], config.bin_width
    )
    rows = [f"{k * hist.bin_width!r},{hist.bins[k]}" for k in sorted(hist.bins)]
    write_csv(_out(config, "histogram.csv"), meta_out, "bin_start,count", rows)
    return report_path


# ---------------------------------------------------------------- pairs

def default_pair_positions(sentence, index, vocab) -> tuple[int, int]:
    """Positions of the two rarest non-special tokens (frequency, then position)."""
    scored = [
        (index.count(tok), pos)
        for pos, tok in enumerate(sentence.source)
        if not vocab.is_special(tok)
    ]
    if len(scored) < 2:
        raise ConfigError("sentence has fewer than two substitutable positions")
    scored.sort()
    positions = sorted(pos for _, pos in scored[:2])
    return positions[0], positions[1]


def run_pair(config: RunConfig, sentence_id: int,
             j_a: int | None = None, j_b: int | None = None) -> Path:
    corpus = load_corpus(config)
    by_id = {pair.id: pair for pair in corpus.pairs}
    if sentence_id not in by_id:
        raise ConfigError(f"sentence id {sentence_id} not in corpus")
    sentence = by_id[sentence_id]

    translator = build_translator(config)
    vocab = translator.vocabulary("source")
    params = decode_params(config)

    if j_a is None or j_b is None:
        index = corpus_mod.build_frequency_index(corpus)
        j_a, j_b = default_pair_positions(sentence, index, vocab)

    sg_a = substitution_sweep(PivotSentence(sentence, j_a, sentence.source[j_a]), vocab, translator, params)
    sg_b = substitution_sweep(PivotSentence(sentence, j_b, sentence.source[j_b]), vocab, translator, params)
    result = pair_sweep(sentence, j_a, j_b, sg_a, sg_b, translator, params)

    record = {
        "sentence_id": result.sentence_id,
        "positions": list(result.positions),
        "sg_a": result.sg_a,
        "sg_b": result.sg_b,
        "pair_count": result.pair_count,
        "ratio": result.ratio,
    }
    path = _out(config, "pairs.jsonl")
    existing: list[dict] = []
    if path.exists():
        pmeta, existing = read_jsonl(path)
        _check_digest(pmeta, config, str(path))
    existing.append(record)
    write_jsonl(path, meta_record(config.digest(), config.seed, direction=config.direction), existing)
    return path


# ---------------------------------------------------------------- ranking

def run_rank(configs: list[RunConfig], out_path: Path | str,
             bleu_sentences: int = 2000) -> Path:
    """Side-by-side entropy and BLEU ranking across runs.

    Each config must already have its report.json; BLEU is computed by
    translating the first ``bleu_sentences`` corpus pairs with that run's
    backend and scoring against the corpus targets.
    """
    rows = []
    for config in configs:
        report_path = Path(config.output_dir) / "report.json"
        import json as _json

        report = _json.loads(report_path.read_text(encoding="utf-8"))
        if report["provenance"].get("config_digest") != config.digest():
            raise ConfigError(f"{report_path} does not match its config")

        corpus = load_corpus(config)
        pairs = corpus.pairs[:bleu_sentences]
        translator = build_translator(config)
        params = decode_params(config)
        hyps = translator.translate_batch([p.source for p in pairs], params)
        refs = [p.target for p in pairs]
        bleu = bleu_corpus(hyps, refs)
        rows.append(
            f"{config.model_id},{config.direction},{report['s']!r},"
            f"{report['k']},{report['s_k']!r},{bleu.score!r}"
        )

    digest = ",".join(c.digest()[:12] for c in configs)
    meta = meta_record(digest, configs[0].seed if configs else 0)
    write_csv(Path(out_path), meta, "model,direction,s,k,s_k,bleu", rows)
    return Path(out_path)
