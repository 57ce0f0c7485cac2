"""Select the triple kernels at import: compiled if built, else pure Python.

Set ``COLLIDERDAG_BACKEND=python`` to force the fallback.
"""
import os

from . import _kernels_py

OK = _kernels_py.OK
SINGULAR = _kernels_py.SINGULAR
DEGENERATE_DENOM = _kernels_py.DEGENERATE_DENOM
UNDEFINED = _kernels_py.UNDEFINED

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled


def default_backend() -> str:
    forced = os.environ.get("COLLIDERDAG_BACKEND", "").strip().lower()
    if forced:
        if forced not in BACKENDS:
            raise RuntimeError(f"COLLIDERDAG_BACKEND={forced!r} is not available: {sorted(BACKENDS)}")
        return forced
    return "compiled" if _compiled is not None else "python"


def get(name=None):
    return BACKENDS[name or default_backend()]
