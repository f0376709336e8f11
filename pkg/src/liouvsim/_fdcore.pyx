# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: periodic stencil application and Boltzmann averages."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()


def stencil_apply(double complex[:, :, ::1] a, double[::1] coef, long[::1] offsets, double inv_h):
    """``out[i, m, j] = inv_h * sum_k coef[k] * a[i, (m + offsets[k]) % g, j]``."""
    cdef Py_ssize_t nb = a.shape[0], g = a.shape[1], na = a.shape[2]
    cdef Py_ssize_t nk = coef.shape[0]
    cdef Py_ssize_t i, m, j, k, src
    cdef double c
    out_arr = np.zeros((nb, g, na), dtype=np.complex128)
    cdef double complex[:, :, ::1] out = out_arr
    # real view: complex * real is two independent fused multiply-adds
    cdef double[:, :, ::1] o = out_arr.view(np.float64)
    cdef const double[:, :, ::1] x = np.asarray(a).view(np.float64)
    cdef Py_ssize_t nr = 2 * na
    with nogil:
        for i in range(nb):
            for k in range(nk):
                c = coef[k] * inv_h
                if c == 0.0:
                    continue
                for m in range(g):
                    src = (m + offsets[k]) % g
                    if src < 0:
                        src += g
                    for j in range(nr):
                        o[i, m, j] += c * x[i, src, j]
    return out_arr


def boltzmann_average(double[::1] energy, double[::1] observable, double temperature):
    """``sum_S O_S e^{-E_S/T} / sum_S e^{-E_S/T}`` with a shifted exponent."""
    cdef Py_ssize_t n = energy.shape[0], i
    cdef double lo = energy[0], w, num = 0.0, den = 0.0, beta = 1.0 / temperature
    with nogil:
        for i in range(1, n):
            if energy[i] < lo:
                lo = energy[i]
        for i in range(n):
            w = exp(beta * (lo - energy[i]))
            num += w * observable[i]
            den += w
    return num / den
