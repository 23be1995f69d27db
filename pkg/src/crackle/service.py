"""Minimal HTTP front end: POST a WAV, get per-window classifications back.

Endpoints::

    POST /classify   body: audio/wav   -> {model_version, window_len, results: [...]}
    GET  /health                        -> {status, model_version, uptime_seconds}
"""

from __future__ import annotations

import itertools
import json
import logging
import time
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .audio_io import WINDOW_LEN, decode_wav
from .classifiers.model import TrainedModel
from .errors import DataError
from .pipeline import classify_recording

log = logging.getLogger(__name__)

MAX_BODY = 32 * 1024 * 1024
DEFAULT_ADDR = "127.0.0.1:8000"


class ServiceState:
    def __init__(self, model: TrainedModel, config=None, max_body=MAX_BODY):
        self.model = model
        self.config = dict(config or {})
        self.max_body = max_body
        self.started = time.monotonic()
        self._requests = itertools.count(1)

    @property
    def model_version(self):
        return self.model.version_tag

    def next_request(self):
        return next(self._requests)

    def classify(self, body: bytes):
        rec = decode_wav(body, source_id="upload")
        results = classify_recording(self.model, rec)
        return {
            "model_version": self.model_version,
            "window_len": int(self.model.metadata.get("window_len", WINDOW_LEN)),
            "results": [r.as_json() for r in results],
        }

    def health(self):
        return {
            "status": "ok",
            "model_version": self.model_version,
            "uptime_seconds": time.monotonic() - self.started,
        }


def _encode(doc):
    return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode()


class Handler(BaseHTTPRequestHandler):
    state: ServiceState = None
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):
        log.info("%s %s", self.address_string(), fmt % args)

    def _send(self, status, doc, close=False):
        body = _encode(doc)
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        if close:
            self.send_header("Connection", "close")
            self.close_connection = True
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path.split("?", 1)[0] == "/health":
            self._send(200, self.state.health())
        else:
            self._send(404, {"error": f"no route for GET {self.path}"})

    def do_POST(self):
        if self.path.split("?", 1)[0] != "/classify":
            self._send(404, {"error": f"no route for POST {self.path}"}, close=True)
            return
        self.state.next_request()
        try:
            length = int(self.headers.get("Content-Length", ""))
        except ValueError:
            self._send(411, {"error": "Content-Length header required"}, close=True)
            return
        if length > self.state.max_body:
            self._send(413, {"error": f"body of {length} bytes exceeds {self.state.max_body}"},
                       close=True)
            return
        body = self.rfile.read(length)
        try:
            doc = self.state.classify(body)
        except DataError as e:
            self._send(400, {"error": str(e)})
            return
        except Exception:
            err_id = uuid.uuid4().hex[:12]
            log.exception("classification failed [%s]", err_id)
            self._send(500, {"error": "internal error", "error_id": err_id})
            return
        self._send(200, doc)


def make_server(state: ServiceState, addr: str = DEFAULT_ADDR) -> ThreadingHTTPServer:
    host, _, port = addr.rpartition(":")
    handler = type("BoundHandler", (Handler,), {"state": state})
    server = ThreadingHTTPServer((host or "127.0.0.1", int(port)), handler)
    server.daemon_threads = True
    return server


def serve(state: ServiceState, addr: str = DEFAULT_ADDR):
    server = make_server(state, addr)
    host, port = server.server_address[:2]
    log.info("serving on http://%s:%s", host, port)
    print(f"serving on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
