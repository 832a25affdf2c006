"""Kernel backend selection.

The compiled Cython module is preferred; the numpy fallback is used when it
is missing or when the environment variable ``FIXPOINT_PURE_PYTHON`` is set
to a truthy value.
"""

import os

if os.environ.get("FIXPOINT_PURE_PYTHON", "").lower() in {"1", "true", "yes"}:
    from . import _csr_py as _impl
else:
    try:
        from . import _csr_cy as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _csr_py as _impl

BACKEND = _impl.BACKEND
csr_matvec = _impl.csr_matvec
richardson_step = _impl.richardson_step

__all__ = ["BACKEND", "csr_matvec", "richardson_step"]
