"""Command-line entry point: serve a model over the wire protocol."""

from __future__ import annotations

import click
import uvicorn

from .app import create_app


@click.group()
def main() -> None:
    """Deterministic greedy translation model server."""


@main.command()
@click.option("--model-path", type=click.Path(exists=True), default=None,
              help="Local Hugging Face seq2seq checkpoint directory.")
@click.option("--model-id", default=None,
              help="Name the model answers to (default: checkpoint directory name).")
@click.option("--stub-spec", type=click.Path(exists=True), default=None,
              help="JSON token-map spec for serving without weights.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8100, show_default=True, type=int)
@click.option("--max-concurrent", default=8, show_default=True, type=int,
              help="Concurrent requests admitted before responding 503.")
def serve(model_path, model_id, stub_spec, host, port, max_concurrent) -> None:
    """Run the HTTP server for one model."""
    if (model_path is None) == (stub_spec is None):
        raise click.UsageError("exactly one of --model-path / --stub-spec is required")
    if model_path is not None:
        from .adapters import HFGreedyAdapter

        adapter = HFGreedyAdapter(model_path, model_id)
    else:
        from .adapters import TokenMapAdapter

        adapter = TokenMapAdapter.load(stub_spec)
        if model_id:
            adapter.model_id = model_id
    app = create_app([adapter], max_concurrent=max_concurrent)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
