"""Kernel backend selection and size-capped wrappers.

The compiled extension is preferred; set WICKLAB_PURE_PY=1 to force the
pure-python fallback.  Both backends emit ladder triplets in the same
order, so operator matrices do not depend on the backend.
"""

import os

import numpy as np

from .errors import SizeOverflow

PERMANENT_CAP = 12

if os.environ.get("WICKLAB_PURE_PY", "") not in ("", "0"):
    from . import _core_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        from . import _core_py as _impl

        BACKEND = "python"


def permanent(a) -> complex:
    """Permanent of a square matrix, capped at size PERMANENT_CAP."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("permanent needs a square matrix")
    if a.shape[0] > PERMANENT_CAP:
        raise SizeOverflow(
            f"permanent of size {a.shape[0]} exceeds cap {PERMANENT_CAP}"
        )
    return complex(_impl.permanent(a))


def creation_triplets(occs, grade_offsets, fermi):
    """Per-mode (src, tgt, amp) arrays for creation operators; see _core_py."""
    return _impl.creation_triplets(occs, grade_offsets, bool(fermi))
