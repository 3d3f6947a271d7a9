"""Select the compiled core when it imports, the numpy twin otherwise.

Set ``SYMBREAK_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _fallback

if os.environ.get("SYMBREAK_BACKEND", "").lower() == "python":
    _impl = _fallback
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:  # extension not built
        _impl = _fallback

NAME = "compiled" if _impl is not _fallback else "python"

STATUS = {0: "converged", 1: "max_iter", 2: "diverged", 3: "stalled", 4: "singular"}


def get(name: str | None = None):
    """The backend module by name; ``None`` gives the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _fallback
    if name == "compiled":
        from . import _core

        return _core
    raise ValueError(f"unknown backend {name!r}")
