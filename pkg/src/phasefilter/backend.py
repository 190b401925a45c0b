"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; otherwise the
pure-Python twin takes over.  Set ``PHASEFILTER_PURE_PYTHON=1`` before import
to force the fallback (useful for benchmarking the two side by side).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("PHASEFILTER_PURE_PYTHON") == "1":
    kernels = _kernels_py
    COMPILED = False
else:
    try:
        from . import _kernels as _compiled

        kernels = _compiled
        COMPILED = True
    except ImportError:
        kernels = _kernels_py
        COMPILED = False

BACKEND_NAME = "compiled" if COMPILED else "pure-python"


def available_backends() -> dict[str, object]:
    """Return every importable kernel module keyed by its name."""
    found: dict[str, object] = {"pure-python": _kernels_py}
    try:
        from . import _kernels as _compiled

        found["compiled"] = _compiled
    except ImportError:
        pass
    return found
