"""The HTTP face of the scorer: validation, dispatch, JSON errors.

Protocol: ``POST /score`` with ``{"prompt": str, "images": [base64 PNG]}``
returns ``{"scores": [float, ...]}``, one finite score per image in
request order. ``GET /health`` returns ``{"status": "ok", "model": spec}``.
Protocol violations are 4xx with a JSON body whose "error" names the
offending key or entry; anything the scorer itself throws (undecodable
image bytes included) is a 5xx with the diagnostic. The server keeps no
state between requests.
"""

from __future__ import annotations

import base64
import binascii
import json
import math
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .models import load_model

DEFAULT_MAX_BATCH = 64


class RequestError(Exception):
    """Client-side protocol violation, carrying the HTTP status to send."""

    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


def score_request(model, body, max_batch: int = DEFAULT_MAX_BATCH) -> list:
    """Validate a parsed /score body and return the score list.

    RequestError marks client faults; any other exception is the scorer's.
    """
    if not isinstance(body, dict):
        raise RequestError(400, "request body must be a JSON object")
    for key in ("prompt", "images"):
        if key not in body:
            raise RequestError(400, f"missing key: {key}")
    prompt, images = body["prompt"], body["images"]
    if not isinstance(prompt, str):
        raise RequestError(400, "prompt must be a string")
    if not isinstance(images, list):
        raise RequestError(400, "images must be a list")
    if len(images) > max_batch:
        raise RequestError(
            413, f"batch of {len(images)} exceeds the limit of {max_batch}")
    blobs = []
    for i, item in enumerate(images):
        if not isinstance(item, str):
            raise RequestError(400, f"images[{i}] must be a base64 string")
        try:
            blobs.append(base64.b64decode(item, validate=True))
        except (binascii.Error, ValueError) as exc:
            raise RequestError(
                400, f"images[{i}] is not valid base64: {exc}") from exc
    scores = [float(model.score(prompt, blob)) for blob in blobs]
    for i, value in enumerate(scores):
        if not math.isfinite(value):
            raise RuntimeError(f"model produced non-finite score {value!r} "
                               f"for images[{i}]")
    return scores


class RewardHandler(BaseHTTPRequestHandler):
    server_version = "rewardserver/0.1"

    def log_message(self, fmt, *args):
        if not getattr(self.server, "quiet", False):
            super().log_message(fmt, *args)

    def _reply(self, status: int, payload: dict) -> None:
        data = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def do_GET(self):
        if self.path == "/health":
            self._reply(200, {"status": "ok",
                              "model": self.server.model.spec})
        else:
            self._reply(404, {"error": f"no such path {self.path}"})

    def do_POST(self):
        if self.path != "/score":
            self._reply(404, {"error": f"no such path {self.path}"})
            return
        try:
            length = int(self.headers.get("Content-Length", 0))
        except ValueError:
            length = 0
        raw = self.rfile.read(length)
        try:
            body = json.loads(raw)
        except ValueError:
            self._reply(400, {"error": "request body is not valid JSON"})
            return
        try:
            scores = score_request(body=body, model=self.server.model,
                                   max_batch=self.server.max_batch)
        except RequestError as exc:
            self._reply(exc.status, {"error": str(exc)})
        except Exception as exc:
            self._reply(500, {"error": f"scoring failed: {exc}"})
        else:
            self._reply(200, {"scores": scores})


class RewardServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, model, max_batch: int = DEFAULT_MAX_BATCH,
                 quiet: bool = False):
        super().__init__(address, RewardHandler)
        self.model = model
        self.max_batch = max_batch
        self.quiet = quiet


def create_server(model_spec: str, host: str = "127.0.0.1", port: int = 8765,
                  max_batch: int = DEFAULT_MAX_BATCH,
                  quiet: bool = False) -> RewardServer:
    """Bind a ready-to-serve server; port 0 picks a free port."""
    return RewardServer((host, port), load_model(model_spec), max_batch, quiet)
