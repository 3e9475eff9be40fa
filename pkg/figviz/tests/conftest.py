import subprocess
import sys

import pytest

HEADER = "experiment,scheme,model,context,char,truth,baseline,corrected,abs_err_baseline,abs_err_corrected"


def _write_csv(path, rows):
    lines = [HEADER] + [",".join(str(v) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture()
def write_csv():
    return _write_csv


@pytest.fixture()
def header():
    return HEADER


@pytest.fixture()
def tiny_csv(tmp_path):
    return _write_csv(
        tmp_path / "tiny.csv",
        [
            ("fig1", "mpe", "exact", "A", "A", 0.3, 0.0, 0.3, 0.3, 0.0),
            ("fig1", "mpe", "exact", "A", "B", 0.7, 1.0, 0.7, 0.3, 0.0),
            ("fig1", "mpe", "exact", "BA", "A", 0.3, 1.0, 0.3, 0.7, 0.0),
        ],
    )


def produce_csv(tmp_path, name, *extra):
    """Run the producer CLI as a black box; skip if it is not installed."""
    out = tmp_path / f"{name}.csv"
    cmd = [sys.executable, "-m", "tokenwise.cli", "experiment", "--name", name, "--out", str(out), *extra]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        pytest.skip(f"producer CLI unavailable: {proc.stderr.strip()[:200]}")
    return out


@pytest.fixture(scope="session")
def fig1_csv(tmp_path_factory):
    return produce_csv(tmp_path_factory.mktemp("fig1"), "fig1")


@pytest.fixture(scope="session")
def markov3_csv(tmp_path_factory):
    return produce_csv(tmp_path_factory.mktemp("m3"), "markov3", "--scheme", "bpe", "--seed", "12")
