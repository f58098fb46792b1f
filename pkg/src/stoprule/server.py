"""Loopback advisor service: live stop/continue guidance over HTTP.

One session per observation stream. A session is created with a model
(explicit odds, secretary, dice, or unknown-odds empirical mode), receives
indicator observations one at a time, and serves a recommendation that
always reflects the full recorded prefix. Sessions live in memory only;
each session's stream is strictly ordered and guarded by its own lock.

Endpoints (JSON bodies, all responses carry schema_version):
  POST   /session                     create; body: {"schema_version":1,"model":{...}}
  POST   /session/{id}/observe        body: {"value":0|1} or {"record":bool}
  GET    /session/{id}/recommendation current advice for the recorded prefix
  DELETE /session/{id}                drop the session
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .montecarlo import EmpiricalOddsPolicy
from .odds import OddsSequence, ThresholdRule, dice, secretary, threshold, win_probability

SCHEMA_VERSION = 1
MAX_BODY_BYTES = 1 << 20


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


@dataclass
class Session:
    session_id: str
    kind: str
    n: int
    sequence: OddsSequence | None  # None in empirical mode
    observations: list[int] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)
    empirical: EmpiricalOddsPolicy | None = None

    def model_summary(self) -> dict:
        summary: dict = {"kind": self.kind, "n": self.n}
        if self.sequence is not None:
            summary["threshold"] = threshold(self.sequence).s
            summary["optimal_value"] = win_probability(self.sequence, threshold(self.sequence))
        return summary

    def observe(self, value: int) -> dict:
        with self.lock:
            if len(self.observations) >= self.n:
                raise ApiError(400, f"all {self.n} observations already recorded")
            self.observations.append(value)
            return {"index": len(self.observations), "value": value}

    def recommendation(self) -> dict:
        with self.lock:
            observations = list(self.observations)
        index = len(observations)
        if self.sequence is not None:
            return self._known_odds_recommendation(index, observations)
        return self._empirical_recommendation(index, observations)

    def _known_odds_recommendation(self, index: int, observations: list[int]) -> dict:
        seq = self.sequence
        rule = threshold(seq)
        current_success = index > 0 and observations[-1] == 1
        stop_now = current_success and index >= rule.s
        win_if_stop = None
        if current_success:
            win_if_stop = 1.0
            for q in seq.q[index:]:
                win_if_stop *= q
        return {
            "action": "stop" if stop_now else "continue",
            "threshold": rule.s,
            "index": index,
            "win_if_stop": win_if_stop,
            "win_if_continue_estimate": self._continue_value(index, rule),
        }

    def _continue_value(self, index: int, rule: ThresholdRule) -> float:
        """Win probability of optimal play over the remaining indices."""
        seq = self.sequence
        if index >= self.n:
            return 0.0
        sub = OddsSequence(seq.probs[index:])
        start = max(rule.s, index + 1) - index  # relative to the remaining window
        return win_probability(sub, ThresholdRule(start))

    def _empirical_recommendation(self, index: int, observations: list[int]) -> dict:
        successes = sum(observations)
        p_hat = (1 + successes) / (index + 2)
        stop_now = False
        if index > 0 and observations[-1] == 1:
            stop_now = self.empirical.decide(index, observations)
        win_if_stop = None
        if index > 0 and observations[-1] == 1:
            win_if_stop = (1.0 - p_hat) ** (self.n - index)
        remaining = self.n - index
        if remaining > 0:
            sub = OddsSequence([p_hat] * remaining)
            continue_estimate = win_probability(sub, threshold(sub))
        else:
            continue_estimate = 0.0
        return {
            "action": "stop" if stop_now else "continue",
            "threshold": self._empirical_threshold(index, p_hat),
            "index": index,
            "win_if_stop": win_if_stop,
            "win_if_continue_estimate": continue_estimate,
        }

    def _empirical_threshold(self, index: int, p_hat: float) -> int:
        """First future index whose success would trigger a stop at current p_hat."""
        for k in range(index + 1, self.n + 1):
            remaining = self.n - k + 1
            if threshold(OddsSequence([p_hat] * remaining)).s == 1:
                return k
        return self.n


class SessionStore:
    def __init__(self) -> None:
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, model: dict) -> Session:
        kind = model.get("kind")
        if kind == "explicit-odds":
            if "probs" not in model:
                raise ApiError(400, "explicit-odds model needs probs")
            seq = OddsSequence(model["probs"])
        elif kind == "secretary":
            seq = secretary(_positive_int(model, "n"))
        elif kind == "dice":
            seq = dice(_positive_int(model, "n"), int(model.get("faces", 6)))
        elif kind == "empirical":
            seq = None
        else:
            raise ApiError(400, f"unknown model kind {kind!r}")
        n = seq.n if seq is not None else _positive_int(model, "n")
        session = Session(
            session_id=uuid.uuid4().hex,
            kind=kind,
            n=n,
            sequence=seq,
            empirical=EmpiricalOddsPolicy(n) if seq is None else None,
        )
        with self._lock:
            self._sessions[session.session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ApiError(404, f"no session {session_id}")
        return session

    def delete(self, session_id: str) -> None:
        with self._lock:
            if session_id not in self._sessions:
                raise ApiError(404, f"no session {session_id}")
            del self._sessions[session_id]


def _positive_int(model: dict, key: str) -> int:
    value = model.get(key)
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ApiError(400, f"model field {key!r} must be a positive integer")
    return value


class AdvisorHandler(BaseHTTPRequestHandler):
    store: SessionStore  # attached by make_server
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send(self, status: int, payload: dict) -> None:
        body = b""
        if status != 204:
            body = json.dumps({"schema_version": SCHEMA_VERSION, **payload}).encode()
        self.send_response(status)
        if body:
            self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()
        if body:
            self.wfile.write(body)

    def _read_json(self) -> dict:
        length = int(self.headers.get("Content-Length", "0") or "0")
        if length > MAX_BODY_BYTES:
            raise ApiError(413, "request body too large")
        raw = self.rfile.read(length) if length else b"{}"
        try:
            document = json.loads(raw or b"{}")
        except json.JSONDecodeError as err:
            raise ApiError(400, f"body is not valid JSON: {err}") from err
        if not isinstance(document, dict):
            raise ApiError(400, "body must be a JSON object")
        return document

    def _route(self, method: str) -> None:
        try:
            parts = [p for p in self.path.split("?")[0].split("/") if p]
            if method == "OPTIONS":
                self._send(204, {})
                return
            if parts == ["session"] and method == "POST":
                body = self._read_json()
                version = body.get("schema_version", SCHEMA_VERSION)
                if version != SCHEMA_VERSION:
                    raise ApiError(400, f"unsupported schema_version {version}")
                if "model" not in body or not isinstance(body["model"], dict):
                    raise ApiError(400, "body needs a model object")
                session = self.store.create(body["model"])
                self._send(
                    201,
                    {"session_id": session.session_id, "model": session.model_summary()},
                )
                return
            if len(parts) >= 2 and parts[0] == "session":
                session_id = parts[1]
                if len(parts) == 2 and method == "DELETE":
                    self.store.delete(session_id)
                    self._send(200, {"deleted": session_id})
                    return
                if len(parts) == 3 and parts[2] == "observe" and method == "POST":
                    body = self._read_json()
                    value = _observation_value(body)
                    ack = self.store.get(session_id).observe(value)
                    self._send(200, ack)
                    return
                if len(parts) == 3 and parts[2] == "recommendation" and method == "GET":
                    self._send(200, self.store.get(session_id).recommendation())
                    return
            raise ApiError(404, f"no route {method} {self.path}")
        except ApiError as err:
            self._send(err.status, {"error": str(err)})
        except ValueError as err:
            self._send(400, {"error": str(err)})

    def do_GET(self):
        self._route("GET")

    def do_POST(self):
        self._route("POST")

    def do_DELETE(self):
        self._route("DELETE")

    def do_OPTIONS(self):
        self._route("OPTIONS")


def _observation_value(body: dict) -> int:
    if "value" in body:
        value = body["value"]
        if value not in (0, 1):
            raise ApiError(400, "observation value must be 0 or 1")
        return int(value)
    if "record" in body:
        if not isinstance(body["record"], bool):
            raise ApiError(400, "record flag must be boolean")
        return int(body["record"])
    raise ApiError(400, "observation needs a value (0/1) or a record flag")


class AdvisorServer:
    """Owns the HTTP server plus its serving thread; safe to embed in tests."""

    def __init__(self, host: str = "127.0.0.1", port: int = 0):
        handler = type("BoundHandler", (AdvisorHandler,), {"store": SessionStore()})
        self._httpd = ThreadingHTTPServer((host, port), handler)
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> tuple[str, int]:
        return self._httpd.server_address[:2]

    def start(self) -> None:
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread:
            self._thread.join(timeout=5)


def serve_forever(host: str = "127.0.0.1", port: int = 8765) -> None:
    server = AdvisorServer(host, port)
    bound_host, bound_port = server.address
    print(f"advisor listening on http://{bound_host}:{bound_port}")
    try:
        server._httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server._httpd.server_close()
