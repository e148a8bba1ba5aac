import os
from pathlib import Path

import numpy as np
import pytest

from ruleforge.cover import CoverProblem
from ruleforge.dataset import Dataset

ROOT = Path(__file__).resolve().parents[1]
DATA_DIR = Path(os.environ.get("RULEFORGE_DATA_DIR", ROOT / "data"))

ACCEPTANCE_LINES: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (int(k.split(".")[0]), k)):
        ok, detail = ACCEPTANCE_LINES[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {detail}")


def random_dataset(rng, m=40, p=3, K=2, levels=None) -> Dataset:
    """Random labelled points; ``levels`` limits features to a few integer values."""
    if levels:
        X = rng.integers(0, levels, size=(m, p)).astype(float)
    else:
        X = rng.normal(size=(m, p))
    y = np.concatenate([np.arange(K), rng.integers(0, K, size=m - K)])
    rng.shuffle(y)
    return Dataset.from_arrays(X, y)


def random_cover(rng, m, n, cost_lo=1.0, cost_hi=2.0) -> CoverProblem:
    """Random feasible covering instance: random subsets plus a repair pass."""
    covered = []
    for _ in range(n):
        size = int(rng.integers(1, max(1, m // 2) + 1))
        covered.append(np.sort(rng.choice(m, size=size, replace=False)))
    hit = np.zeros(m, dtype=bool)
    for c in covered:
        hit[c] = True
    for i in np.flatnonzero(~hit):
        j = int(rng.integers(0, n))
        covered[j] = np.union1d(covered[j], [i])
    costs = rng.uniform(cost_lo, cost_hi, size=n)
    return CoverProblem(m, costs, covered)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def wine():
    from ruleforge.dataset import load_csv

    return load_csv(ROOT / "data" / "wine.csv", "class")


@pytest.fixture
def xor4():
    X = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]
    return Dataset.from_arrays(X, [0, 1, 1, 0])
