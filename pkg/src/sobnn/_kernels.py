"""Compute backend selection.

The compiled extension is preferred when present; the numpy implementation
is the fallback.  ``SOBNN_BACKEND=python`` or ``SOBNN_BACKEND=compiled``
forces the choice at import time (forcing an absent compiled backend is an
error rather than a silent downgrade).  Both backends implement the same
four operations with matching semantics; they may differ in the last bits
of transcendental calls, so cross-backend comparisons are approximate while
re-runs on one backend are bit-identical.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels_cy
except ImportError:  # pragma: no cover - build-dependent
    _kernels_cy = None

_choice = os.environ.get("SOBNN_BACKEND", "").strip().lower()
if _choice == "python":
    _impl = _kernels_py
elif _choice == "compiled":
    if _kernels_cy is None:
        raise ImportError("SOBNN_BACKEND=compiled but the compiled kernels are not built")
    _impl = _kernels_cy
elif _choice == "":
    _impl = _kernels_cy if _kernels_cy is not None else _kernels_py
else:
    raise ImportError(f"SOBNN_BACKEND={_choice!r} not recognized (use 'python' or 'compiled')")

BACKEND_NAME: str = _impl.BACKEND_NAME

jet_forward = _impl.jet_forward
jet_vjp = _impl.jet_vjp
cross_forward = _impl.cross_forward
cross_vjp = _impl.cross_vjp


def available_backends() -> tuple[str, ...]:
    names = ["python"]
    if _kernels_cy is not None:
        names.insert(0, "compiled")
    return tuple(names)


def backend_module(name: str):
    """Fetch a backend by name (for benchmarks and agreement tests)."""
    if name == "python":
        return _kernels_py
    if name == "compiled" and _kernels_cy is not None:
        return _kernels_cy
    raise KeyError(f"backend {name!r} not available here")
