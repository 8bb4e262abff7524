"""Shared fixtures: every interaction with the core goes over its CLI."""

import subprocess

import pytest

from lmgnn.coreio import core_cli


def run_cli(*args, expect: int = 0) -> subprocess.CompletedProcess:
    """Run the core tool directly, asserting on the exit code."""
    proc = subprocess.run(
        core_cli() + [str(a) for a in args], capture_output=True, text=True
    )
    assert proc.returncode == expect, (
        f"exit {proc.returncode} != {expect}: {proc.stderr or proc.stdout}"
    )
    return proc


@pytest.fixture(scope="session")
def core_available():
    try:
        run_cli("version")
    except (OSError, AssertionError) as exc:  # pragma: no cover
        pytest.skip(f"core CLI not runnable: {exc}")
    return True


@pytest.fixture()
def path_graph(tmp_path, core_available):
    """A 6-node path 0-1-2-3-4-5 canonicalized by the core ingest."""
    raw = tmp_path / "path_raw.txt"
    raw.write_text("".join(f"{i} {i+1}\n" for i in range(5)), encoding="utf-8")
    out = tmp_path / "path.txt"
    run_cli("ingest", raw, "--out", out)
    return out
