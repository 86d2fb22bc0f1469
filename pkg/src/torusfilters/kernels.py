"""Kernel dispatch: the compiled extension when built, numpy otherwise.

Set ``TORUSFILTERS_PURE_PYTHON=1`` to force the numpy fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("TORUSFILTERS_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass

householder_complete_batch = _impl.householder_complete_batch
polar_unitary = _impl.polar_unitary
polar_unitary_batch = _impl.polar_unitary_batch
align_frames = _impl.align_frames

__all__ = ["BACKEND", "householder_complete_batch", "polar_unitary", "polar_unitary_batch",
           "align_frames"]
