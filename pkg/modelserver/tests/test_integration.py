"""End-to-end check over a real socket with the pipeline's HTTP client."""

import socket
import threading
import time

import pytest
import uvicorn

from stubmodel import stub_adapter
from modelserver.app import create_app

transentropy = pytest.importorskip("transentropy")
from transentropy.translator import DecodeParams, HttpTranslator  # noqa: E402


@pytest.fixture(scope="module")
def server_url():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    app = create_app([stub_adapter()], max_concurrent=4)
    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started:
        if time.monotonic() > deadline:
            raise RuntimeError("server failed to start")
        time.sleep(0.02)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=10)


def test_client_translate_roundtrip(server_url):
    client = HttpTranslator(server_url)
    params = DecodeParams(model_id="stub-en-de")
    adapter = stub_adapter()
    inputs = [(0, 1, 2), (14, 5), (13, 10, 15)]
    got = client.translate_batch(inputs, params)
    want = [tuple(seq) for seq in adapter.translate_batch([list(s) for s in inputs], 128)]
    assert got == want


def test_client_vocab_roundtrip(server_url):
    client = HttpTranslator(server_url)
    vocab = client.vocabulary("source")
    assert vocab.size == 16
    assert vocab.surface(15) == "s15"
    assert vocab.is_special(15)
    assert not vocab.is_special(0)


def test_client_rejects_unknown_model(server_url):
    from transentropy.errors import ProtocolError

    client = HttpTranslator(server_url)
    with pytest.raises(ProtocolError):
        client.translate_batch([(0,)], DecodeParams(model_id="nope"))
