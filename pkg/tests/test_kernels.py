"""Compiled kernels against the NumPy fallback: identical semantics."""

import numpy as np

from nlslab import kernels
from nlslab import _kernels_py as py


def _random_complex(n, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def test_backend_reports_name():
    assert kernels.backend_name() in ("cython", "numpy")


def test_nonlinear_phase_matches():
    v1 = _random_complex(4096, 0)
    v2 = v1.copy()
    kernels.nonlinear_phase(v1, 0.37, 1.0)
    py.nonlinear_phase(v2, 0.37, 1.0)
    assert np.max(np.abs(v1 - v2)) < 1e-14
    # zero coupling leaves the array untouched
    v3 = v1.copy()
    kernels.nonlinear_phase(v3, 0.37, 0.0)
    assert np.array_equal(v3, v1)


def test_multiply_inplace_matches():
    v1 = _random_complex(1000, 1)
    w = _random_complex(1000, 2)
    v2 = v1.copy()
    kernels.multiply_inplace(v1, w)
    py.multiply_inplace(v2, w)
    assert np.max(np.abs(v1 - v2)) < 1e-15


def test_multiply_real_inplace_matches():
    v1 = _random_complex(1000, 3)
    w = np.abs(_random_complex(1000, 4).real)
    v2 = v1.copy()
    kernels.multiply_real_inplace(v1, w)
    py.multiply_real_inplace(v2, w)
    assert np.max(np.abs(v1 - v2)) < 1e-15


def test_reductions_match():
    v = _random_complex(4096, 5)
    w = np.abs(_random_complex(4096, 6).real)
    assert abs(kernels.abs2_sum(v) - py.abs2_sum(v)) < 1e-9
    assert abs(kernels.abs4_sum(v) - py.abs4_sum(v)) < 1e-9
    assert abs(kernels.weighted_abs2_sum(v, w) - py.weighted_abs2_sum(v, w)) < 1e-9


def test_apply_mask_collect_matches():
    v1 = _random_complex(512, 7)
    v2 = v1.copy()
    keep = (np.arange(512) % 3 != 0).astype(np.uint8)
    r1 = kernels.apply_mask_collect(v1, keep)
    r2 = py.apply_mask_collect(v2, keep)
    assert abs(r1 - r2) < 1e-12
    assert np.array_equal(v1, v2)
    assert np.all(v1[keep == 0] == 0)


def test_readonly_inputs_accepted():
    v = _random_complex(64, 8)
    w = np.abs(_random_complex(64, 9).real)
    v.flags.writeable = False
    w.flags.writeable = False
    kernels.abs2_sum(v)
    kernels.weighted_abs2_sum(v, w)
