import importlib.util
import os
import subprocess
import sys

import numpy as np
import pytest

from ruleforge import splitter


def _backend_under(env_value):
    env = dict(os.environ)
    if env_value is None:
        env.pop("RULEFORGE_PURE_PYTHON", None)
    else:
        env["RULEFORGE_PURE_PYTHON"] = env_value
    out = subprocess.run(
        [sys.executable, "-c", "import ruleforge.splitter as s; print(s.BACKEND)"],
        capture_output=True,
        text=True,
        env=env,
        check=True,
    )
    return out.stdout.strip()


def test_env_forces_python_backend():
    assert _backend_under("1") == "python"


def test_default_backend_prefers_compiled():
    built = importlib.util.find_spec("ruleforge._splitter") is not None
    assert _backend_under(None) == ("cython" if built else "python")


def test_unknown_backend_name():
    with pytest.raises(ValueError):
        splitter.get_backend("fortran")


@pytest.mark.skipif(splitter.BACKEND != "cython", reason="compiled kernel not built")
def test_kernels_agree_on_random_nodes():
    py = splitter.get_backend("python")
    cy = splitter.get_backend("cython")
    rng = np.random.default_rng(0)
    for _ in range(200):
        n, p, K = int(rng.integers(2, 40)), int(rng.integers(1, 5)), int(rng.integers(2, 4))
        X = rng.integers(0, 5, size=(n, p)).astype(float)
        y = rng.integers(0, K, size=n).astype(np.int64)
        w = rng.uniform(0, 3, size=n)
        totals = np.bincount(y, weights=w, minlength=K).astype(float)
        weight = float(sum(totals))
        feats = np.arange(p, dtype=np.int64)
        for crit in (splitter.GINI, splitter.ENTROPY):
            a = py.best_split(X, y, w, feats, totals, weight, crit, np.log(K))
            b = cy.best_split(X, y, w, feats, totals, weight, crit, np.log(K))
            assert a == b
