"""Split-search backend selection.

The compiled ``_splitter`` extension is used when it was built; otherwise,
or when ``RULEFORGE_PURE_PYTHON=1`` is set, the numpy implementation in
``_splitter_py`` is used.  Both return identical splits.
"""

import os

from . import _splitter_py

GINI = _splitter_py.GINI
ENTROPY = _splitter_py.ENTROPY

compiled = None
if os.environ.get("RULEFORGE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _splitter as compiled
    except ImportError:
        compiled = None

_impl = compiled if compiled is not None else _splitter_py
BACKEND = "cython" if compiled is not None else "python"

best_split = _impl.best_split
node_impurity = _impl.node_impurity


def get_backend(name: str):
    """Return the kernel module for ``"cython"`` or ``"python"``."""
    if name == "python":
        return _splitter_py
    if name == "cython":
        if compiled is None:
            raise ImportError("compiled splitter extension is not available")
        return compiled
    raise ValueError(f"unknown backend {name!r}")
