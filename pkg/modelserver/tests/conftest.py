import sys
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

sys.path.insert(0, str(Path(__file__).parent))

from stubmodel import stub_adapter  # noqa: E402

from modelserver.app import create_app  # noqa: E402


@pytest.fixture(scope="module")
def app():
    return create_app([stub_adapter()], max_concurrent=4)


@pytest.fixture(scope="module")
def client(app):
    with TestClient(app) as c:
        yield c
