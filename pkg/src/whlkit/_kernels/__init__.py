"""Kernel backend selection.

Two interchangeable backends implement the pairwise-construction and
median-selection kernels: a compiled Cython module and a NumPy fallback.
The compiled one is preferred when importable; set ``WHLKIT_BACKEND`` to
``python`` or ``cython`` to force a choice. Both produce bit-identical
results, so the selection only affects speed.
"""

import os

from . import pyback


def _load(name: str):
    if name == "python":
        return pyback
    from . import _cyk  # noqa: PLC0415 (deferred: extension may be absent)

    return _cyk


def available_backends() -> tuple[str, ...]:
    try:
        _load("cython")
    except ImportError:
        return ("python",)
    return ("python", "cython")


def get_backend(name: str):
    """Return the backend module for ``name`` ('python' or 'cython')."""
    if name not in ("python", "cython"):
        raise ValueError(f"unknown kernel backend {name!r}")
    return _load(name)


_requested = os.environ.get("WHLKIT_BACKEND", "auto").strip().lower()
if _requested in ("", "auto"):
    try:
        _impl = _load("cython")
    except ImportError:
        _impl = pyback
elif _requested in ("python", "py"):
    _impl = pyback
elif _requested in ("cython", "c", "compiled"):
    _impl = _load("cython")
else:
    raise ImportError(f"WHLKIT_BACKEND={_requested!r} is not a known backend")

BACKEND = _impl.BACKEND_NAME
SELECT_BAND = _impl.SELECT_BAND
STRICT, WITH_DIAGONAL, ALL = pyback.STRICT, pyback.WITH_DIAGONAL, pyback.ALL

pair_arrays = _impl.pair_arrays
walsh_values = _impl.walsh_values
median = _impl.median
weighted_median = _impl.weighted_median
