# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled CSR hot loops: matrix-vector product and the Richardson sweep.

Accumulation order matches the numpy fallback (row-major, storage order)
so both backends agree to rounding.
"""

import numpy as np

cimport numpy as cnp

BACKEND = "cython"

ctypedef cnp.int64_t idx_t


def csr_matvec(const idx_t[::1] row_offsets, const idx_t[::1] col_indices,
               const double[::1] values, const double[::1] x):
    cdef Py_ssize_t n_rows = row_offsets.shape[0] - 1
    out = np.empty(n_rows, dtype=np.float64)
    cdef double[::1] y = out
    cdef Py_ssize_t i
    cdef idx_t k
    cdef double acc
    for i in range(n_rows):
        acc = 0.0
        for k in range(row_offsets[i], row_offsets[i + 1]):
            acc += values[k] * x[col_indices[k]]
        y[i] = acc
    return out


def richardson_step(const idx_t[::1] row_offsets, const idx_t[::1] col_indices,
                    const double[::1] values, const double[::1] x,
                    const double[::1] b):
    cdef Py_ssize_t n_rows = row_offsets.shape[0] - 1
    out = np.empty(n_rows, dtype=np.float64)
    cdef double[::1] y = out
    cdef Py_ssize_t i
    cdef idx_t k
    cdef double acc
    for i in range(n_rows):
        acc = 0.0
        for k in range(row_offsets[i], row_offsets[i + 1]):
            acc += values[k] * x[col_indices[k]]
        y[i] = (x[i] - acc) + b[i]
    return out
