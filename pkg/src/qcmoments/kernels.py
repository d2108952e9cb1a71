"""Kernel backend selection.

The compiled extension is preferred when importable; the pure-Python module
is the fallback.  ``QCM_PURE_PYTHON=1`` in the environment forces the
fallback, and :func:`use_backend` switches temporarily (the benchmark and the
cross-backend tests rely on this).
"""

from __future__ import annotations

import os
from contextlib import contextmanager

from . import _kernels_py

_IMPLS = {"python": _kernels_py}

if not os.environ.get("QCM_PURE_PYTHON"):
    try:
        from . import _kernels  # type: ignore[attr-defined]

        _IMPLS["cython"] = _kernels
    except ImportError:
        pass

_active = "cython" if "cython" in _IMPLS else "python"


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_IMPLS))


def active_backend() -> str:
    return _active


@contextmanager
def use_backend(name: str):
    """Temporarily dispatch kernel calls to the named backend."""
    global _active
    if name not in _IMPLS:
        raise ValueError(f"backend {name!r} not available (have {available_backends()})")
    previous = _active
    _active = name
    try:
        yield
    finally:
        _active = previous


def expand_product(xs_a, zs_a, ws_a, xs_b, zs_b, ws_b, tol):
    return _IMPLS[_active].expand_product(xs_a, zs_a, ws_a, xs_b, zs_b, ws_b, tol)


def group_first_fit(xs, zs, q):
    return _IMPLS[_active].group_first_fit(xs, zs, q)
