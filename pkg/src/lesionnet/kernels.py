"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
implementation. Set ``LESIONNET_BACKEND=python`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _fallback

_requested = os.environ.get("LESIONNET_BACKEND", "auto").lower()

_compiled = None
if _requested != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
    if _compiled is None and _requested == "cython":
        raise ImportError("LESIONNET_BACKEND=cython but the compiled extension is not built")

backend = _compiled if _compiled is not None else _fallback
BACKEND = backend.NAME


def get_backend(name: str | None = None):
    """Return a backend module by name ('cython', 'python') or the active one."""
    if name is None:
        return backend
    if name == "python":
        return _fallback
    if name == "cython":
        if _compiled is None:
            from . import _kernels  # raises ImportError if not built
            return _kernels
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    names = ["python"]
    try:
        get_backend("cython")
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names
