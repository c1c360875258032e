"""Filter kernels: compiled extension when available, pure Python otherwise.

The compiled module is optional. Set KEYTAP_NO_EXT=1 to force the Python
fallback (useful for benchmarking and for debugging the kernel itself).
BACKEND records which implementation was selected at import time.
"""

import os

import numpy as np

from . import _iir_py

if os.environ.get("KEYTAP_NO_EXT"):
    _impl = _iir_py
    BACKEND = "python"
else:
    try:
        from . import _iir_cy as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _iir_py
        BACKEND = "python"


def sosfilt(sos, x):
    """Filter 1-D signal x through a cascade of second-order sections.

    sos has shape (n_sections, 6), rows [b0, b1, b2, a0, a1, a2] with
    a0 normalized to 1. Returns a new float64 array; x is not modified.
    Initial filter state is zero.
    """
    sos = np.ascontiguousarray(sos, dtype=np.float64)
    if sos.ndim != 2 or sos.shape[1] != 6:
        raise ValueError("sos must have shape (n_sections, 6)")
    if not np.allclose(sos[:, 3], 1.0):
        raise ValueError("sos rows must be normalized to a0 == 1")
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("x must be 1-D")
    out = np.empty_like(x)
    _impl.sosfilt(sos, x, out)
    return out
