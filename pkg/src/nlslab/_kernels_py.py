"""Pure-NumPy fallback kernels, semantically identical to _corekernels."""

from __future__ import annotations

import numpy as np


def nonlinear_phase(v: np.ndarray, tau: float, coupling: float) -> None:
    np.multiply(v, np.exp((-1j * coupling * tau) * np.abs(v) ** 2), out=v)


def multiply_inplace(v: np.ndarray, w: np.ndarray) -> None:
    np.multiply(v, w, out=v)


def multiply_real_inplace(v: np.ndarray, w: np.ndarray) -> None:
    np.multiply(v, w, out=v)


def abs2_sum(v: np.ndarray) -> float:
    return float(np.sum(v.real * v.real + v.imag * v.imag))


def abs4_sum(v: np.ndarray) -> float:
    a = v.real * v.real + v.imag * v.imag
    return float(np.sum(a * a))


def weighted_abs2_sum(v: np.ndarray, w: np.ndarray) -> float:
    return float(np.sum(w * (v.real * v.real + v.imag * v.imag)))


def apply_mask_collect(v: np.ndarray, keep: np.ndarray) -> float:
    drop = keep == 0
    removed = v[drop]
    total = float(np.sum(removed.real**2 + removed.imag**2))
    v[drop] = 0.0
    return total
