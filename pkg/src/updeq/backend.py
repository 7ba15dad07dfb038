"""Backend selection: compiled tree/simulation kernels when the extension
built, pure numpy/Python twins otherwise.

Set UPDEQ_BACKEND=python to force the fallback, UPDEQ_BACKEND=cython to
require the extension (ImportError if missing). Both backends implement
identical contracts; tests pin them against each other.
"""

from __future__ import annotations

import os

try:
    from . import _core
except ImportError:
    _core = None

_env = os.environ.get("UPDEQ_BACKEND", "auto").lower()
if _env in ("python", "pure"):
    _active = "python"
elif _env in ("cython", "compiled", "core"):
    if _core is None:
        raise ImportError(
            "UPDEQ_BACKEND requested the compiled backend but updeq._core "
            "is not built; run `pip install -e . --no-build-isolation`")
    _active = "cython"
elif _env == "auto":
    _active = "cython" if _core is not None else "python"
else:
    raise ValueError(f"unknown UPDEQ_BACKEND value {_env!r}")


def name() -> str:
    return _active


def compiled_available() -> bool:
    return _core is not None


def kernels():
    """Tree-sweep kernel module for the active backend."""
    if _active == "cython":
        return _core
    from .solver import kernels_py
    return kernels_py


def board_kernels():
    """Compiled board-game simulation kernels, or None on the fallback."""
    if _active == "cython":
        return _core
    return None
