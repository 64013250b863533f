import shutil
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parents[1]
FIXTURES = REPO_ROOT / "fixtures"


@pytest.fixture(scope="session")
def benchmark_dir() -> Path:
    path = FIXTURES / "benchmark"
    if not path.exists():
        pytest.fail("benchmark fixtures missing; run scripts/make_fixtures.py")
    return path


@pytest.fixture(scope="session")
def pipeline20_dir() -> Path:
    path = FIXTURES / "pipeline20"
    if not path.exists():
        pytest.fail("pipeline fixtures missing; run scripts/make_fixtures.py")
    return path


@pytest.fixture()
def benchmark_label_log(benchmark_dir, tmp_path) -> Path:
    """Writable label log preloaded with the primary annotations only."""
    log = tmp_path / "labels.jsonl"
    shutil.copy(benchmark_dir / "labels_primary.jsonl", log)
    return log


@pytest.fixture()
def benchmark_full_label_log(benchmark_dir, tmp_path) -> Path:
    """Writable label log with primary and adjudication annotations."""
    log = tmp_path / "labels_full.jsonl"
    with open(log, "w", encoding="utf-8") as out:
        for name in ("labels_primary.jsonl", "labels_adjudication.jsonl"):
            out.write((benchmark_dir / name).read_text())
    return log
