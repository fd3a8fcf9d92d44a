"""Numeric kernels with a compiled core and a numpy fallback.

The compiled module (clipal.kernels._fast, built from _fast.pyx) is
preferred when importable; otherwise the numpy implementation in _py is
used. Set CLIPAL_PURE_PYTHON=1 to force the fallback, or call
``use_backend`` to switch at runtime (used by the benchmark and the
backend-equivalence tests).
"""

from __future__ import annotations

import os

from . import _py

_BACKENDS = {"python": _py}
try:
    from . import _fast

    _BACKENDS["cython"] = _fast
except ImportError:
    _fast = None

entropy_rows = _py.entropy_rows
pairwise_iou = _py.pairwise_iou
greedy_match = _py.greedy_match
_ACTIVE = "python"


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def active_backend() -> str:
    return _ACTIVE


def use_backend(name: str) -> None:
    """Rebind the kernel functions to the named backend."""
    global entropy_rows, pairwise_iou, greedy_match, _ACTIVE
    try:
        mod = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown kernel backend {name!r}; have {available_backends()}") from None
    entropy_rows = mod.entropy_rows
    pairwise_iou = mod.pairwise_iou
    greedy_match = mod.greedy_match
    _ACTIVE = name


if not os.environ.get("CLIPAL_PURE_PYTHON") and "cython" in _BACKENDS:
    use_backend("cython")
