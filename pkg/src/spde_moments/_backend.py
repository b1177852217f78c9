"""Pick the replica-kernel implementation at import time.

``SPDE_MOMENTS_BACKEND`` may be ``auto`` (default), ``cython`` or ``python``.
``auto`` uses the compiled extension when it imports and the numpy fallback
otherwise.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _pycore


def _load_compiled() -> ModuleType:
    from . import _core  # noqa: F401  (compiled extension)

    return _core


def get(name: str) -> ModuleType:
    if name == "python":
        return _pycore
    if name == "cython":
        return _load_compiled()
    raise ValueError(f"unknown backend {name!r}")


def available() -> list[str]:
    out = ["python"]
    try:
        _load_compiled()
        out.insert(0, "cython")
    except ImportError:
        pass
    return out


_choice = os.environ.get("SPDE_MOMENTS_BACKEND", "auto").strip().lower()
if _choice == "auto":
    try:
        kernels = _load_compiled()
        name = "cython"
    except ImportError:
        kernels = _pycore
        name = "python"
else:
    kernels = get(_choice)
    name = _choice
