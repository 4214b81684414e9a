"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
fallback is imported. Setting ``WAVEDELAY_PURE_PYTHON=1`` forces the fallback.
"""
import os

if os.environ.get("WAVEDELAY_PURE_PYTHON") == "1":
    from wavedelay import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from wavedelay import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        from wavedelay import _kernels_py as _impl

        BACKEND = "python"

extend_cells = _impl.extend_cells
leapfrog = _impl.leapfrog

__all__ = ["BACKEND", "extend_cells", "leapfrog"]
