# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Fused inner-loop kernels for the spectral stepper and functionals.

Each function has a NumPy twin in nlslab._kernels_py with identical
semantics; nlslab.kernels picks whichever is importable.  All arrays are
contiguous 1-D views of grid data (complex128 / float64 / uint8).
"""

from libc.math cimport cos, sin

import numpy as np
cimport numpy as cnp

cnp.import_array()


def nonlinear_phase(cnp.complex128_t[::1] v, double tau, double coupling):
    """In place: v <- v * exp(-1j * coupling * |v|^2 * tau)."""
    cdef Py_ssize_t i, n = v.shape[0]
    cdef double re, im, a, c, s
    cdef double g = coupling * tau
    for i in range(n):
        re = v[i].real
        im = v[i].imag
        a = -g * (re * re + im * im)
        c = cos(a)
        s = sin(a)
        v[i].real = re * c - im * s
        v[i].imag = re * s + im * c


def multiply_inplace(cnp.complex128_t[::1] v, const cnp.complex128_t[::1] w):
    """In place complex multiply: v <- v * w."""
    cdef Py_ssize_t i, n = v.shape[0]
    cdef double re, im
    for i in range(n):
        re = v[i].real * w[i].real - v[i].imag * w[i].imag
        im = v[i].real * w[i].imag + v[i].imag * w[i].real
        v[i].real = re
        v[i].imag = im


def multiply_real_inplace(cnp.complex128_t[::1] v, const cnp.float64_t[::1] w):
    """In place real scaling: v <- v * w."""
    cdef Py_ssize_t i, n = v.shape[0]
    for i in range(n):
        v[i].real = v[i].real * w[i]
        v[i].imag = v[i].imag * w[i]


def abs2_sum(const cnp.complex128_t[::1] v):
    """Sum of |v_i|^2 (Kahan compensated)."""
    cdef Py_ssize_t i, n = v.shape[0]
    cdef double acc = 0.0, comp = 0.0, term, y, t
    for i in range(n):
        term = v[i].real * v[i].real + v[i].imag * v[i].imag
        y = term - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t
    return acc


def abs4_sum(const cnp.complex128_t[::1] v):
    """Sum of |v_i|^4 (Kahan compensated)."""
    cdef Py_ssize_t i, n = v.shape[0]
    cdef double acc = 0.0, comp = 0.0, a, y, t
    for i in range(n):
        a = v[i].real * v[i].real + v[i].imag * v[i].imag
        y = a * a - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t
    return acc


def weighted_abs2_sum(const cnp.complex128_t[::1] v, const cnp.float64_t[::1] w):
    """Sum of w_i * |v_i|^2 (Kahan compensated)."""
    cdef Py_ssize_t i, n = v.shape[0]
    cdef double acc = 0.0, comp = 0.0, term, y, t
    for i in range(n):
        term = w[i] * (v[i].real * v[i].real + v[i].imag * v[i].imag)
        y = term - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t
    return acc


def apply_mask_collect(cnp.complex128_t[::1] v, const cnp.uint8_t[::1] keep):
    """Zero entries where keep == 0; return the |.|^2 sum of what was removed."""
    cdef Py_ssize_t i, n = v.shape[0]
    cdef double removed = 0.0, comp = 0.0, y, t
    for i in range(n):
        if keep[i] == 0:
            y = (v[i].real * v[i].real + v[i].imag * v[i].imag) - comp
            t = removed + y
            comp = (t - removed) - y
            removed = t
            v[i].real = 0.0
            v[i].imag = 0.0
    return removed
