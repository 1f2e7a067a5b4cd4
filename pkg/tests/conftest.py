import os
from pathlib import Path

import numpy as np
import pytest

from eigenrec.dataset import Layout, load_dataset
from eigenrec.imageio import GrayImage, serialize_pgm

REPO = Path(__file__).resolve().parent.parent

# filled by tests/test_acceptance.py, printed at the end of the session
ACCEPTANCE_RESULTS = []


def orl_root():
    root = Path(os.environ.get("EIGENREC_ORL", REPO / "data" / "orl"))
    return root if (root / "s1" / "1.pgm").is_file() else None


@pytest.fixture(scope="session")
def orl_path():
    root = orl_root()
    if root is None:
        pytest.skip("ORL database not found; run scripts/fetch_orl.py or set EIGENREC_ORL")
    return root


@pytest.fixture(scope="session")
def orl(orl_path):
    return load_dataset(orl_path, Layout.ORL, name="ORL")


def write_synthetic(root: Path, n_subjects=5, per_subject=6, width=10, height=12,
                    noise=6.0, seed=0, names=None):
    """One directory per subject of noisy copies of a per-subject prototype."""
    rng = np.random.default_rng(seed)
    root.mkdir(parents=True, exist_ok=True)
    names = names or [f"s{i + 1}" for i in range(n_subjects)]
    for name in names:
        proto = rng.uniform(40, 215, size=width * height)
        d = root / name
        d.mkdir()
        for j in range(per_subject):
            px = np.clip(np.round(proto + rng.normal(0, noise, proto.size)), 0, 255)
            (d / f"{j + 1}.pgm").write_bytes(serialize_pgm(GrayImage(width, height, px)))
    return root


@pytest.fixture
def synthetic_root(tmp_path):
    return write_synthetic(tmp_path / "faces")


@pytest.fixture
def synthetic(synthetic_root):
    return load_dataset(synthetic_root, Layout.ORL, name="synthetic")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:>2}. {title}: {detail}")
