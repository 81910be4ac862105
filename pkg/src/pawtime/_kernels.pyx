# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Same signatures as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def weighted_abs2(const double complex[:, ::1] states, const double[::1] weights):
    cdef Py_ssize_t n = states.shape[0], m = states.shape[1]
    cdef Py_ssize_t j, i
    cdef double acc, re, im
    if weights.shape[0] != m:
        raise ValueError("weights length does not match state dimension")
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] res = out
    with nogil:
        for j in range(n):
            acc = 0.0
            for i in range(m):
                if weights[i] != 0.0:
                    re = states[j, i].real
                    im = states[j, i].imag
                    acc = acc + weights[i] * (re * re + im * im)
            res[j] = acc
    return out


def multiply_inplace(double complex[::1] psi, const double complex[::1] factor):
    cdef Py_ssize_t m = psi.shape[0], i
    cdef double a, b, c, e
    if factor.shape[0] != m:
        raise ValueError("factor length does not match state dimension")
    with nogil:
        for i in range(m):
            # spelled out: the C complex product routes through __muldc3
            a = psi[i].real
            b = psi[i].imag
            c = factor[i].real
            e = factor[i].imag
            psi[i] = (a * c - b * e) + 1j * (a * e + b * c)


def residual_sq(const double complex[:, ::1] states,
                const double complex[:, ::1] h_states,
                double dt, double hbar):
    cdef Py_ssize_t n = states.shape[0], d = states.shape[1]
    cdef Py_ssize_t j, k, jp, jm
    cdef double acc, dre, dim, rre, rim, scale = hbar / (2.0 * dt)
    if h_states.shape[0] != n or h_states.shape[1] != d:
        raise ValueError("states and h_states shapes differ")
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] res = out
    with nogil:
        for j in range(n):
            jp = j + 1 if j + 1 < n else 0
            jm = j - 1 if j > 0 else n - 1
            acc = 0.0
            for k in range(d):
                # i*hbar*(psi[j+1]-psi[j-1])/(2 dt) - H psi[j]
                dre = states[jp, k].real - states[jm, k].real
                dim = states[jp, k].imag - states[jm, k].imag
                rre = -scale * dim - h_states[j, k].real
                rim = scale * dre - h_states[j, k].imag
                acc = acc + rre * rre + rim * rim
            res[j] = acc
    return out
