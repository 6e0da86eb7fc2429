import json
import os
import sys
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from convsent import audio, synth  # noqa: E402


@pytest.fixture
def sr():
    return 16000


@pytest.fixture
def write_wav(tmp_path):
    """Write float samples to a 16-bit mono WAV and return its path."""
    counter = iter(range(10_000))

    def _write(samples, sample_rate=16000, name=None):
        path = tmp_path / (name or f"sig{next(counter)}.wav")
        path.write_bytes(audio.encode_wav(np.asarray(samples), sample_rate))
        return path

    return _write


@pytest.fixture
def tone_in_silence(sr):
    """0.5 s silence, 1 s of 440 Hz at amplitude 0.5, 0.5 s silence."""
    x = np.concatenate([np.zeros(sr // 2), synth.tone(440.0, 1.0, 0.5, sr), np.zeros(sr // 2)])
    return audio.AudioSignal(x, sr)


@pytest.fixture(scope="session")
def demo_conversation():
    return synth.demo_conversation()


@pytest.fixture(scope="session")
def eight_turns():
    return synth.conversation(["A", "B", "B", "A", "B", "A", "A", "B"], seed=3)


class _StubState:
    def __init__(self):
        self.responses = []  # list of (status, body) consumed in order; last one repeats
        self.requests = []


@pytest.fixture
def stub_server():
    """Local HTTP transcription stub; configure ``state.responses`` before use."""
    state = _StubState()

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            body = self.rfile.read(int(self.headers.get("Content-Length", 0)))
            state.requests.append({"headers": dict(self.headers), "body": body})
            if len(state.responses) > 1:
                status, payload = state.responses.pop(0)
            else:
                status, payload = state.responses[0]
            data = payload if isinstance(payload, bytes) else json.dumps(payload).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def log_message(self, *args):
            pass

    server = HTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    state.url = f"http://127.0.0.1:{server.server_port}/transcribe"
    yield state
    server.shutdown()
    server.server_close()


# ---- acceptance reporting: one PASS/FAIL line per criterion ------------------

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    key = (number, title)
    failed = call.excinfo is not None and not call.excinfo.errisinstance(pytest.skip.Exception)
    if call.when == "call" or failed:
        _criteria[key] = _criteria.get(key, True) and not failed


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), ok in sorted(_criteria.items()):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title}")
