import subprocess
import sys

import pytest


@pytest.fixture(scope="session")
def server_address():
    """Launch the simulator's protocol server through its CLI (the external
    interface) on an ephemeral port."""
    proc = subprocess.Popen(
        [sys.executable, "-m", "cellsleep.cli", "serve", "--port", "0"],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
    line = proc.stdout.readline().strip()
    if not line.startswith("LISTENING "):
        proc.terminate()
        raise RuntimeError(f"server failed to start: {line!r}")
    _, host, port = line.split()
    yield host, int(port)
    proc.terminate()
    proc.wait(timeout=10)
