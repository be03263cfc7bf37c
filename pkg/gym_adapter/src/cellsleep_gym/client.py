"""Line-oriented client for the simulator wire protocol (version 1)."""

from __future__ import annotations

import json
import socket


class ProtocolError(RuntimeError):
    """Server answered ERROR; ``reason`` carries its explanation."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class WireClient:
    """One protocol session over one TCP connection."""

    def __init__(self, host: str, port: int, timeout: float = 60.0):
        self._host, self._port, self._timeout = host, int(port), timeout
        self._sock = socket.create_connection((host, int(port)), timeout=timeout)
        self._file = self._sock.makefile("rw", encoding="utf-8", newline="\n")
        self._next_id = 0

    def request(self, msg: dict) -> dict:
        msg = dict(msg)
        msg["id"] = self._next_id
        self._next_id += 1
        self._file.write(json.dumps(msg, separators=(",", ":")) + "\n")
        self._file.flush()
        line = self._file.readline()
        if not line:
            raise ConnectionError("server closed the connection")
        resp = json.loads(line)
        if resp.get("type") == "ERROR":
            raise ProtocolError(resp.get("reason", "unknown error"))
        return resp

    def hello(self) -> dict:
        return self.request({"type": "HELLO", "version": "1"})

    def init(self, scenario: dict | None = None, seed: int | None = None) -> dict:
        msg: dict = {"type": "INIT"}
        if scenario is not None:
            msg["scenario"] = scenario
        elif seed is not None:
            msg["seed"] = int(seed)
        return self.request(msg)

    def reset(self) -> list[float]:
        return self.request({"type": "RESET"})["observation"]

    def step(self, bits) -> dict:
        return self.request({"type": "STEP", "action": [int(b) for b in bits]})

    def kpm_batch(self, **filters) -> list[dict]:
        return self.request({"type": "KPM_BATCH", **filters})["records"]

    def close(self) -> None:
        try:
            try:
                self.request({"type": "BYE"})
            except (OSError, ConnectionError, ProtocolError):
                pass
            self._file.close()
        finally:
            self._sock.close()
