"""Hot loops with a compiled backend and a numpy fallback.

The compiled extension is used when it was built; set ``QIGRAV_PURE_PYTHON=1``
to force the fallback. ``BACKEND`` names the active implementation.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _fallback

try:
    from . import _compiled
except ImportError:  # extension not built
    _compiled = None


def get_backend(name: str) -> ModuleType:
    if name == "compiled":
        if _compiled is None:
            raise ImportError("the compiled kernel extension is not built")
        return _compiled
    if name == "python":
        return _fallback
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    return (["compiled"] if _compiled is not None else []) + ["python"]


if _compiled is not None and os.environ.get("QIGRAV_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "compiled"
else:
    BACKEND = "python"

_impl = get_backend(BACKEND)
enumerate_sequential = _impl.enumerate_sequential
play_rounds = _impl.play_rounds
