"""FastAPI application implementing the translation wire protocol.

POST /v1/translate
    body: {"model": str, "decode": {"strategy": "greedy", "max_output_len": int},
           "inputs": [[int, ...], ...]}
    200 → {"outputs": [[int, ...], ...]}

GET /v1/vocab?side=source|target
    200 → {"entries": [{"id": int, "surface": str, "special": bool}, ...]}

Errors are JSON bodies {"error": str, "message": str}: 400 for malformed
requests (including non-greedy decode, which is rejected server-side so the
degeneracy measurement can never silently run on sampled output), 404 for an
unknown model, 503 when the concurrent-request budget is exhausted.

Responses are rendered with a fixed, key-sorted JSON encoder so identical
requests produce byte-identical bodies.
"""

from __future__ import annotations

import json
import threading

from fastapi import FastAPI, Request, Response

from .adapters import ModelAdapter

GREEDY = "greedy"
DEFAULT_MAX_OUTPUT_LEN = 128


def _json_response(payload: dict, status: int = 200) -> Response:
    body = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return Response(content=body, status_code=status, media_type="application/json")


def _error(status: int, error: str, message: str) -> Response:
    return _json_response({"error": error, "message": message}, status)


class _BadRequest(Exception):
    pass


def _parse_translate_body(body: object) -> tuple[str, int, list[list[int]]]:
    if not isinstance(body, dict):
        raise _BadRequest("request body must be a JSON object")
    model = body.get("model")
    if not isinstance(model, str):
        raise _BadRequest("'model' must be a string")

    decode = body.get("decode", {})
    if not isinstance(decode, dict):
        raise _BadRequest("'decode' must be an object")
    strategy = decode.get("strategy", GREEDY)
    if strategy != GREEDY:
        raise _BadRequest(f"decode strategy {strategy!r} not supported; only 'greedy'")
    max_output_len = decode.get("max_output_len", DEFAULT_MAX_OUTPUT_LEN)
    if not isinstance(max_output_len, int) or isinstance(max_output_len, bool) or max_output_len < 1:
        raise _BadRequest("'decode.max_output_len' must be a positive integer")

    inputs = body.get("inputs")
    if not isinstance(inputs, list):
        raise _BadRequest("'inputs' must be a list of token-id sequences")
    for seq in inputs:
        if not isinstance(seq, list) or not all(
            isinstance(t, int) and not isinstance(t, bool) for t in seq
        ):
            raise _BadRequest("each input must be a list of integer token ids")
    return model, max_output_len, inputs


def create_app(adapters: list[ModelAdapter], max_concurrent: int = 8) -> FastAPI:
    app = FastAPI(title="modelserver", docs_url=None, redoc_url=None)
    models = {a.model_id: a for a in adapters}
    if not models:
        raise ValueError("at least one model adapter is required")
    default = adapters[0]
    slots = threading.Semaphore(max_concurrent)
    # inference runs one batch at a time: simplest way to keep adapters that
    # share internal state deterministic under concurrent requests
    infer_lock = threading.Lock()

    @app.post("/v1/translate")
    async def translate(request: Request) -> Response:
        try:
            body = await request.json()
        except json.JSONDecodeError as exc:
            return _error(400, "BadRequest", f"invalid JSON body: {exc}")
        try:
            model, max_output_len, inputs = _parse_translate_body(body)
        except _BadRequest as exc:
            return _error(400, "BadRequest", str(exc))
        adapter = models.get(model)
        if adapter is None:
            return _error(404, "UnknownModel", f"no model named {model!r}")
        if not slots.acquire(blocking=False):
            return _error(503, "Overloaded", "too many concurrent requests; retry")
        try:
            with infer_lock:
                outputs = adapter.translate_batch(inputs, max_output_len)
        finally:
            slots.release()
        return _json_response({"outputs": [list(seq) for seq in outputs]})

    @app.get("/v1/vocab")
    async def vocab(request: Request) -> Response:
        side = request.query_params.get("side")
        if side not in ("source", "target"):
            return _error(400, "BadRequest", "query parameter 'side' must be 'source' or 'target'")
        model = request.query_params.get("model")
        adapter = default if model is None else models.get(model)
        if adapter is None:
            return _error(404, "UnknownModel", f"no model named {model!r}")
        return _json_response({"entries": adapter.vocab_entries(side)})

    return app
