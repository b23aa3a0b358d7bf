"""Scoring bridges to external models: subprocess stdio or an HTTP endpoint.

Wire protocol, one JSON object per line (stdio) or per POST (http):

    request:  {"id": <int>, "items": [[<active indices>], ...]}
    response: {"id": <int>, "scores": [<float in [0,1]>, ...]}

Responses may arrive out of order but must carry the matching id. Timeouts,
malformed responses, and out-of-range scores are fatal per request after the
retry budget (3 attempts). Scoring is serialized per connection.
"""

from __future__ import annotations

import json
import queue
import shlex
import subprocess
import threading

import numpy as np

from .models import ScoredModel

ATTEMPTS = 3


class BridgeError(RuntimeError):
    """External model unreachable or protocol violation."""


def _check_scores(payload, request_id: int, n_items: int) -> list[float]:
    if not isinstance(payload, dict) or payload.get("id") != request_id:
        raise BridgeError(f"response id mismatch (expected {request_id})")
    scores = payload.get("scores")
    if not isinstance(scores, list) or len(scores) != n_items:
        raise BridgeError(f"expected {n_items} scores, got {scores!r}")
    out = []
    for s in scores:
        if not isinstance(s, (int, float)) or not 0.0 <= float(s) <= 1.0:
            raise BridgeError(f"score out of [0,1]: {s!r}")
        out.append(float(s))
    return out


class SubprocessBridge:
    """Newline-delimited JSON over a child process's stdio."""

    def __init__(self, command: str, timeout: float = 30.0):
        self.command = command
        self.timeout = timeout
        self._proc = subprocess.Popen(
            shlex.split(command), stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            text=True, bufsize=1)
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        self._pending: dict[int, dict] = {}

    def _pump(self):
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF marker

    def request(self, request_id: int, items) -> list[float]:
        assert self._proc.stdin is not None
        if self._proc.poll() is not None:
            raise BridgeError("bridge process has exited")
        try:
            self._proc.stdin.write(json.dumps({"id": request_id, "items": [list(s) for s in items]}) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise BridgeError(f"bridge process unreachable: {exc}") from exc
        while request_id not in self._pending:
            try:
                line = self._lines.get(timeout=self.timeout)
            except queue.Empty:
                raise BridgeError(f"bridge timeout after {self.timeout}s") from None
            if line is None:
                raise BridgeError("bridge process closed its output")
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise BridgeError(f"malformed bridge response: {exc}") from exc
            if isinstance(payload, dict) and isinstance(payload.get("id"), int):
                self._pending[payload["id"]] = payload
            else:
                raise BridgeError(f"malformed bridge response: {line.strip()!r}")
        return _check_scores(self._pending.pop(request_id), request_id, len(items))

    def close(self):
        if self._proc.poll() is None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()


class HttpBridge:
    """POST /score with the same request/response bodies."""

    def __init__(self, url: str, timeout: float = 30.0, client=None):
        import httpx

        self.url = url.rstrip("/")
        self.timeout = timeout
        self._client = client or httpx.Client(timeout=timeout)

    def request(self, request_id: int, items) -> list[float]:
        import httpx

        try:
            resp = self._client.post(self.url + "/score",
                                     json={"id": request_id,
                                           "items": [list(s) for s in items]})
        except httpx.HTTPError as exc:
            raise BridgeError(f"bridge endpoint unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise BridgeError(f"bridge endpoint returned {resp.status_code}")
        try:
            payload = resp.json()
        except ValueError as exc:
            raise BridgeError(f"malformed bridge response: {exc}") from exc
        return _check_scores(payload, request_id, len(items))

    def close(self):
        self._client.close()


class BridgeModel(ScoredModel):
    """ScoredModel backed by a bridge connection; one request in flight at a time."""

    def __init__(self, transport, name: str = "bridge", threshold: float = 0.5):
        self._transport = transport
        self.name = name
        self.threshold = float(threshold)
        self._next_id = 0
        self._lock = threading.Lock()

    def score_batch(self, sets) -> np.ndarray:
        with self._lock:
            last_error = None
            for _ in range(ATTEMPTS):
                self._next_id += 1
                try:
                    return np.array(self._transport.request(self._next_id, sets))
                except BridgeError as exc:
                    last_error = exc
            raise BridgeError(f"bridge request failed after {ATTEMPTS} attempts: {last_error}")

    def close(self):
        self._transport.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def connect_external_model(command: str | None = None, url: str | None = None,
                           threshold: float = 0.5, timeout: float = 30.0,
                           name: str | None = None) -> BridgeModel:
    """Open a bridge to an external model given a command line or an endpoint URL."""
    if (command is None) == (url is None):
        raise ValueError("pass exactly one of command or url")
    if command is not None:
        transport = SubprocessBridge(command, timeout=timeout)
        return BridgeModel(transport, name=name or f"bridge:{command}", threshold=threshold)
    transport = HttpBridge(url, timeout=timeout)
    return BridgeModel(transport, name=name or f"bridge:{url}", threshold=threshold)
