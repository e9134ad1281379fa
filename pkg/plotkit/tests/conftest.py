from __future__ import annotations

import subprocess
import sys
from pathlib import Path

import pytest


def run_simulator(*args: str) -> None:
    result = subprocess.run([sys.executable, "-m", "cislunar.cli", *args],
                            capture_output=True, text=True)
    if result.returncode != 0:
        raise RuntimeError(f"simulator call failed: {result.stderr}")


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory) -> Path:
    """Real CSV artifacts produced through the simulator's CLI."""
    root = tmp_path_factory.mktemp("artifacts")
    run_simulator("run", "--config", "broadcastdemo",
                  "--out", str(root / "broadcast"), "--quiet")
    run_simulator("run", "--config", "transactdemo",
                  "--out", str(root / "transact"), "--quiet")
    run_simulator("sweep", "--config", "driftdemo", "--samples", "60",
                  "--include-unit", "--out", str(root / "sweep"), "--quiet")
    run_simulator("compare-models", "--config", "modelswapdemo",
                  "--out", str(root / "modelswap"), "--quiet")
    return root
