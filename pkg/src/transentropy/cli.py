"""Command-line surface: select-pivots, sweep, entropy, pair, rank."""

from __future__ import annotations

import dataclasses
import functools
import json
import sys
from pathlib import Path

import click

from .config import RunConfig
from .errors import PipelineError
from .pipeline import run_entropy, run_pair, run_rank, run_select_pivots, run_sweep


def _config_options(fn):
    opts = [
        click.option("--source-file", required=True, type=click.Path(exists=True)),
        click.option("--target-file", required=True, type=click.Path(exists=True)),
        click.option("--source-vocab-file", required=True, type=click.Path(exists=True)),
        click.option("--target-vocab-file", required=True, type=click.Path(exists=True)),
        click.option("--direction", required=True),
        click.option("--model-id", required=True),
        click.option("--output-dir", required=True, type=click.Path()),
        click.option("--synth-spec", type=click.Path(exists=True), default=None),
        click.option("--translator-url", default=None),
        click.option("--max-len", default=128, show_default=True),
        click.option("--max-output-len", default=128, show_default=True),
        click.option("--pivot-count", default=100, show_default=True),
        click.option("--min-freq", default=500, show_default=True),
        click.option("--max-freq", default=1500, show_default=True),
        click.option("--sentences-per-token", default=30, show_default=True),
        click.option("--keep", default=24, show_default=True),
        click.option("--beta-c", default=5.0, show_default=True),
        click.option("--k", default=95, show_default=True),
        click.option("--bin-width", default=1.0, show_default=True),
        click.option("--seed", default=0, show_default=True),
        click.option("--concurrency", default=4, show_default=True),
        click.option("--cache", type=click.Path(), default=None),
    ]
    for opt in reversed(opts):
        fn = opt(fn)

    field_names = {f.name for f in dataclasses.fields(RunConfig)}

    @functools.wraps(fn)
    def wrapper(**kwargs):
        config_kwargs = {k: v for k, v in kwargs.items() if k in field_names}
        extras = {k: v for k, v in kwargs.items() if k not in field_names}
        try:
            config = RunConfig(**config_kwargs)
        except PipelineError as exc:
            _fail(exc)
        return fn(config=config, **extras)

    return wrapper


def _fail(exc: PipelineError):
    json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
    sys.stderr.write("\n")
    sys.exit(1)


def _run(fn, *args, **kwargs):
    try:
        path = fn(*args, **kwargs)
        click.echo(str(path))
    except PipelineError as exc:
        _fail(exc)


@click.group()
def main():
    """Replacement-degeneracy entropy measurement pipeline."""


@main.command("select-pivots")
@_config_options
def select_pivots_cmd(config: RunConfig):
    """Sample pivot tokens and their pivot sentences."""
    _run(run_select_pivots, config)


@main.command("sweep")
@click.option("--pivots", type=click.Path(exists=True), default=None,
              help="pivots.jsonl from select-pivots (defaults to output dir)")
@click.option("--max-units", type=int, default=None,
              help="stop after N new (pivot, sentence) units; resumable")
@_config_options
def sweep_cmd(config: RunConfig, pivots, max_units):
    """Run substitution sweeps for every pivot sentence (resumable)."""
    _run(run_sweep, config, pivots, max_units)


@main.command("entropy")
@click.option("--sweeps", type=click.Path(exists=True), default=None)
@_config_options
def entropy_cmd(config: RunConfig, sweeps):
    """Aggregate sweeps into the entropy report, tables, and histogram."""
    _run(run_entropy, config, sweeps)


@main.command("pair")
@click.option("--sentence-id", required=True, type=int)
@click.option("--position-a", type=int, default=None)
@click.option("--position-b", type=int, default=None)
@_config_options
def pair_cmd(config: RunConfig, sentence_id, position_a, position_b):
    """Two-position degeneracy sweep on one sentence."""
    _run(run_pair, config, sentence_id, position_a, position_b)


@main.command("rank")
@click.option("--config", "config_paths", multiple=True, required=True,
              type=click.Path(exists=True), help="RunConfig JSON, one per model run")
@click.option("--out", required=True, type=click.Path())
@click.option("--bleu-sentences", default=2000, show_default=True)
def rank_cmd(config_paths, out, bleu_sentences):
    """Combine entropy reports and BLEU into one ranking table."""
    configs = [RunConfig.load(p) for p in config_paths]
    _run(run_rank, configs, out, bleu_sentences)


if __name__ == "__main__":
    main()
