import hashlib
import shutil
from pathlib import Path

import pytest

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def neutral_run() -> Path:
    """A committed report-data run whose far field is exactly neutral."""
    return GOLDEN / "run-neutral"


@pytest.fixture(scope="session")
def sweep_runs() -> list[Path]:
    """Three committed coupling sweeps at different interior charges."""
    return [GOLDEN / f"run-sweep-q{q}" for q in ("060", "070", "080")]


@pytest.fixture()
def neutral_copy(tmp_path: Path, neutral_run: Path) -> Path:
    """A throwaway copy of the neutral run for tests that damage artifacts."""
    dst = tmp_path / "run-neutral"
    shutil.copytree(neutral_run, dst)
    return dst


def _tree_digest(root: Path) -> dict[str, str]:
    return {
        str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


@pytest.fixture(scope="session")
def tree_digest():
    """Per-file content hashes of a directory tree (for no-mutation checks)."""
    return _tree_digest
