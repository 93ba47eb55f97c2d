"""Kernel dispatch: compiled Cython core when available, NumPy otherwise.

Set NLSLAB_PURE_PYTHON=1 to force the fallback (used by the benchmark and
by tests that compare the two implementations).
"""

from __future__ import annotations

import os

from . import _kernels_py

_FORCE_PY = os.environ.get("NLSLAB_PURE_PYTHON", "") == "1"

try:
    if _FORCE_PY:
        raise ImportError("pure-python kernels forced via NLSLAB_PURE_PYTHON")
    from . import _corekernels as _impl

    COMPILED = True
except ImportError:
    _impl = _kernels_py
    COMPILED = False

nonlinear_phase = _impl.nonlinear_phase
multiply_inplace = _impl.multiply_inplace
multiply_real_inplace = _impl.multiply_real_inplace
abs2_sum = _impl.abs2_sum
abs4_sum = _impl.abs4_sum
weighted_abs2_sum = _impl.weighted_abs2_sum
apply_mask_collect = _impl.apply_mask_collect


def backend_name() -> str:
    return "cython" if COMPILED else "numpy"
