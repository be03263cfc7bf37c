"""Line-delimited JSON control protocol between the simulator and an
external agent.

Each TCP connection owns one independent simulation session with the state
machine HELLO -> INIT -> (RESET -> STEP*)* -> BYE. Requests and responses
are single-line UTF-8 JSON objects; every request gets exactly one response
that echoes the request id. Numbers are serialized as shortest round-trip
decimals, so observation and reward streams survive the wire bit-exactly.

The full message schema lives in protocol.md at the repository root.
"""

from __future__ import annotations

import hashlib
import json
import socket
import socketserver
import threading

from .datalake import CSV_FIELDS
from .env import CellOnOffEnv, LifecycleError
from .scenario import build_default_scenario, scenario_from_dict, validate

PROTOCOL_VERSION = "1"

_NEW, _GREETED, _READY, _RUNNING = "new", "greeted", "ready", "running"


class ReplayMismatchError(Exception):
    """Transcript replay diverged from the recorded server output."""

    def __init__(self, line_no: int, expected: str, actual: str):
        super().__init__(f"replay mismatch at line {line_no}")
        self.line_no = line_no
        self.expected = expected
        self.actual = actual


def dumps(obj) -> str:
    """Canonical one-line encoding used for every server response."""
    return json.dumps(obj, separators=(",", ":"))


class Session:
    """Protocol state machine for one connection; transport-agnostic."""

    def __init__(self):
        self.state = _NEW
        self.config = None
        self.env: CellOnOffEnv | None = None

    def handle_line(self, line: str) -> tuple[str, bool]:
        """Process one request line; returns (response line, keep_open)."""
        try:
            msg = json.loads(line)
            if not isinstance(msg, dict):
                raise ValueError("message must be a JSON object")
        except ValueError as exc:
            return self._error(None, f"malformed: {exc}"), True
        msg_id = msg.get("id")
        mtype = msg.get("type")
        if mtype == "BYE":
            return dumps({"type": "BYE", "id": msg_id}), False
        handler = {
            "HELLO": self._on_hello,
            "INIT": self._on_init,
            "RESET": self._on_reset,
            "STEP": self._on_step,
            "KPM_BATCH": self._on_kpm_batch,
        }.get(mtype)
        if handler is None:
            return self._error(msg_id, f"unknown type: {mtype!r}"), True
        return handler(msg, msg_id), True

    def _error(self, msg_id, reason: str) -> str:
        return dumps({"type": "ERROR", "id": msg_id, "reason": reason})

    def _order_violation(self, msg_id, reason: str) -> str:
        # fall back to the post-INIT state: config kept, episode discarded
        if self.config is not None:
            self.state = _READY
            self.env = None
        return self._error(msg_id, reason)

    def _on_hello(self, msg, msg_id) -> str:
        if self.state != _NEW:
            return self._order_violation(msg_id, "protocol order: HELLO already done")
        version = msg.get("version")
        if version is None:
            return self._error(msg_id, "version field is mandatory in HELLO")
        if str(version) != PROTOCOL_VERSION:
            return self._error(
                msg_id, f"unsupported version {version!r}, server speaks "
                        f"{PROTOCOL_VERSION}")
        self.state = _GREETED
        return dumps({"type": "HELLO", "id": msg_id, "version": PROTOCOL_VERSION})

    def _on_init(self, msg, msg_id) -> str:
        if self.state != _GREETED:
            if self.state == _NEW:
                return self._error(msg_id, "protocol order: HELLO required first")
            return self._order_violation(msg_id, "protocol order: INIT already done")
        if "scenario" in msg:
            try:
                config = scenario_from_dict(msg["scenario"])
            except (KeyError, TypeError, ValueError) as exc:
                return self._error(msg_id, f"config: unparseable scenario ({exc})")
        else:
            config = build_default_scenario(int(msg.get("seed", 0)))
        violations = validate(config)
        if violations:
            return self._error(msg_id, "config: " + "; ".join(violations))
        self.config = config
        self.state = _READY
        return dumps({
            "type": "INIT",
            "id": msg_id,
            "n_gnbs": config.n_gnbs,
            "observation_length": 12 * config.n_gnbs + 1,
            "episode_steps": config.episode_steps,
        })

    def _on_reset(self, msg, msg_id) -> str:
        if self.state not in (_READY, _RUNNING):
            return self._error(msg_id, "protocol order: INIT required first")
        self.env = CellOnOffEnv(self.config)
        obs = self.env.reset()
        self.state = _RUNNING
        return dumps({
            "type": "RESET",
            "id": msg_id,
            "observation": [float(x) for x in obs],
        })

    def _on_step(self, msg, msg_id) -> str:
        if self.state != _RUNNING or self.env is None:
            return self._order_violation(msg_id, "lifecycle: reset required")
        action = msg.get("action")
        if (not isinstance(action, list)
                or len(action) != self.config.n_gnbs
                or any(b not in (0, 1) for b in action)):
            return self._error(
                msg_id, f"action must be a list of {self.config.n_gnbs} bits")
        try:
            result = self.env.step(action)
        except LifecycleError as exc:
            return self._error(msg_id, f"lifecycle: {exc}")
        return dumps({
            "type": "STEP_RESULT",
            "id": msg_id,
            "observation": [float(x) for x in result.observation],
            "reward": result.reward,
            "terminated": result.terminated,
            "info": result.info,
        })

    def _on_kpm_batch(self, msg, msg_id) -> str:
        if self.state != _RUNNING or self.env is None:
            return self._order_violation(msg_id, "lifecycle: reset required")
        period = self.config.control_period_ms
        last_ts = max(0, (self.env.sim.clock.step_index - 1) * period)
        t_from = msg.get("t_from_ms", last_ts)
        t_to = msg.get("t_to_ms", last_ts + period)
        try:
            rows = self.env.datalake.query_window(
                int(t_from), int(t_to),
                imsi=msg.get("imsi"), cell_id=msg.get("cell_id"))
        except ValueError as exc:
            return self._error(msg_id, str(exc))
        return dumps({
            "type": "KPM_BATCH",
            "id": msg_id,
            "records": [
                {name: getattr(r, name) for name in CSV_FIELDS} for r in rows
            ],
        })


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        session = Session()
        for raw in self.rfile:
            line = raw.decode("utf-8", errors="replace").rstrip("\r\n")
            if not line:
                continue
            response, keep_open = session.handle_line(line)
            self.wfile.write(response.encode("utf-8") + b"\n")
            self.wfile.flush()
            if not keep_open:
                break


class _TcpServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


class ProtocolServer:
    """TCP server handing each connection its own session. Usable blocking
    (:meth:`serve_forever`) or as a context manager running in a thread."""

    def __init__(self, bind: str = "127.0.0.1", port: int = 0):
        self._server = _TcpServer((bind, port), _Handler)
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> tuple[str, int]:
        return self._server.server_address[:2]

    def start(self) -> "ProtocolServer":
        self._thread = threading.Thread(
            target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def serve_forever(self) -> None:
        self._server.serve_forever()

    def __enter__(self) -> "ProtocolServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


def serve(bind: str, port: int) -> None:
    """Run the protocol server until interrupted; prints the bound address
    (useful with port 0)."""
    server = ProtocolServer(bind, port)
    host, actual_port = server.address
    print(f"LISTENING {host} {actual_port}", flush=True)
    try:
        server.serve_forever()
    finally:
        server.stop()


class ProtocolClient:
    """Minimal line-oriented client used by tests and tooling."""

    def __init__(self, host: str, port: int, timeout: float = 30.0):
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._file = self._sock.makefile("rw", encoding="utf-8", newline="\n")
        self._next_id = 0

    def request_line(self, line: str) -> str:
        self._file.write(line + "\n")
        self._file.flush()
        response = self._file.readline()
        if not response:
            raise ConnectionError("server closed the connection")
        return response.rstrip("\n")

    def request(self, msg: dict) -> dict:
        msg = dict(msg)
        msg.setdefault("id", self._next_id)
        self._next_id = msg["id"] + 1
        return json.loads(self.request_line(dumps(msg)))

    def close(self) -> None:
        try:
            self._file.close()
        finally:
            self._sock.close()

    def __enter__(self) -> "ProtocolClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def replay_transcript(transcript) -> str:
    """Re-drive a recorded (request_line, response_line) sequence against a
    fresh session; raises :class:`ReplayMismatchError` at the first
    divergence, otherwise returns a hex digest of the response stream.
    An empty transcript yields an empty digest.
    """
    session = Session()
    responses: list[str] = []
    for line_no, (c2s, recorded) in enumerate(transcript):
        actual, _ = session.handle_line(c2s)
        if actual != recorded:
            raise ReplayMismatchError(line_no, recorded, actual)
        responses.append(actual)
    if not responses:
        return ""
    payload = ("\n".join(responses) + "\n").encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


def save_transcript(transcript, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for c2s, s2c in transcript:
            f.write(dumps({"c2s": c2s, "s2c": s2c}) + "\n")


def load_transcript(path: str) -> list[tuple[str, str]]:
    out: list[tuple[str, str]] = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                rec = json.loads(line)
                out.append((rec["c2s"], rec["s2c"]))
    return out
