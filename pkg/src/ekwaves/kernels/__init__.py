"""Stencil kernels with a compiled fast path and a numpy fallback.

The compiled extension (ekwaves.kernels._stencils, Cython) is used when it
imported successfully; otherwise the numpy reference backend serves the
same API. Set EKWAVES_KERNELS=ref to force the fallback, e.g. for the
backend-comparison benchmark.
"""

import os

from . import _ref

BACKEND = "ref"
_impl = _ref

if os.environ.get("EKWAVES_KERNELS", "").lower() not in {"ref", "numpy"}:
    try:
        from . import _stencils as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        pass

diff1 = _impl.diff1
ek_rhs = _impl.ek_rhs
gauge_rhs = _impl.gauge_rhs
apply_d2h = _impl.apply_d2h
lin_rhs = _impl.lin_rhs
interp4 = _impl.interp4
interp6 = _impl.interp6

__all__ = ["BACKEND", "diff1", "ek_rhs", "gauge_rhs", "apply_d2h", "lin_rhs",
           "interp4", "interp6", "reference", "compiled"]


def reference():
    """The numpy backend module (always available)."""
    return _ref


def compiled():
    """The Cython backend module, or None if it was not built."""
    try:
        from . import _stencils
        return _stencils
    except ImportError:
        return None
