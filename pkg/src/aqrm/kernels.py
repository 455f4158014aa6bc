"""Kernel dispatch: compiled ``_core`` if importable, else the numpy fallback.

Set ``AQRM_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("AQRM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback

tridiagonalize = _impl.tridiagonalize
tql2 = _impl.tql2
eigh = _impl.eigh
normalized_constraint_grid = _impl.normalized_constraint_grid
EigenConvergenceError = _impl.EigenConvergenceError


def backend_module(name):
    """Return the kernel module for ``name`` in {"python", "cython"}."""
    if name == "python":
        return _fallback
    if name == "cython":
        from . import _core
        return _core
    raise ValueError(f"unknown backend {name!r}")
