import http.server
import json
import threading
from pathlib import Path

import numpy as np
import pytest

from tsadbench.core.specs import PrimitiveRegistry, load_pipelines
from tsadbench.core.types import TimeSeries
from tsadbench.data.registry import DatasetRegistry
from tsadbench.data.synthetic import suite_configs, write_dataset

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def registry():
    return PrimitiveRegistry.default([FIXTURES / "primitives"])


@pytest.fixture(scope="session")
def pipelines(registry):
    """The bundled pipelines; the fixture pipelines are loaded by the tests using them."""
    return load_pipelines(registry)


@pytest.fixture(scope="session")
def small_suite(tmp_path_factory):
    """Registry holding a three-signal synthetic dataset named ``synthetic``."""
    out = tmp_path_factory.mktemp("suite")
    path = write_dataset(suite_configs(3, seed=1, length=400), out)
    return DatasetRegistry.from_file(path)


@pytest.fixture
def sine():
    t = np.arange(1000)
    return TimeSeries(t, np.sin(2 * np.pi * t / 100))


class MockServer:
    """Tiny HTTP server whose responses are scripted per test.

    ``responses`` is a list of ``(status, body_bytes, delay_seconds)`` served
    in order; the last entry repeats. Every request is recorded.
    """

    def __init__(self):
        self.responses = [(200, b"{}", 0.0)]
        self.requests = []
        server = self

        class Handler(http.server.BaseHTTPRequestHandler):
            def _respond(self):
                length = int(self.headers.get("Content-Length", 0) or 0)
                body = self.rfile.read(length) if length else b""
                server.requests.append((self.command, self.path, dict(self.headers), body))
                index = min(len(server.requests) - 1, len(server.responses) - 1)
                status, payload, delay = server.responses[index]
                if delay:
                    threading.Event().wait(delay)
                try:
                    self.send_response(status)
                    self.send_header("Content-Length", str(len(payload)))
                    self.end_headers()
                    self.wfile.write(payload)
                except (BrokenPipeError, ConnectionResetError):
                    pass

            do_GET = do_POST = _respond

            def log_message(self, *args):
                pass

        self.httpd = http.server.ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self.thread.start()

    @property
    def url(self):
        host, port = self.httpd.server_address
        return f"http://{host}:{port}"

    def reply_json(self, document, status=200, delay=0.0):
        self.responses = [(status, json.dumps(document).encode(), delay)]

    def close(self):
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture
def mock_server():
    server = MockServer()
    yield server
    server.close()
