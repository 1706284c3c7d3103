# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels.

Behavioral twin of ``capid._kernels_py``; see that module for the
documented contracts. Keep the two in exact parity. Inputs may be
read-only arrays, hence the const views.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def multilinear_eval(values, mu):
    """Aggregate each row of `values` with the set-function vector `mu`."""
    v_arr = np.ascontiguousarray(values, dtype=np.float64)
    if v_arr.ndim != 2:
        raise ValueError("values must be a 2-d array")
    cdef const double[:, ::1] v = v_arr
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t m = v.shape[1]
    cdef Py_ssize_t full = 1 << m
    tab_arr = np.ascontiguousarray(mu, dtype=np.float64)
    if tab_arr.ndim != 1 or tab_arr.shape[0] != full:
        raise ValueError(f"mu must have length {full}, got {tab_arr.shape}")
    cdef const double[::1] tab = tab_arr
    out_arr = np.empty(n, dtype=np.float64)
    work_arr = np.empty(full, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[::1] t = work_arr
    cdef double x
    cdef Py_ssize_t i, j, k, width
    for i in range(n):
        for k in range(full):
            t[k] = tab[k]
        width = full
        for j in range(m):
            x = v[i, j]
            width >>= 1
            for k in range(width):
                t[k] = t[2 * k] * (1.0 - x) + t[2 * k + 1] * x
        out[i] = t[0]
    return out_arr


def group_mean_estimate(y, cells, n_cells):
    """Mean of `y` within each cell, expanded back to rows."""
    y_arr = np.ascontiguousarray(y, dtype=np.float64)
    c_arr = np.ascontiguousarray(cells, dtype=np.int64)
    if y_arr.ndim != 1 or y_arr.shape != c_arr.shape:
        raise ValueError("y and cells must be 1-d arrays of equal length")
    cdef const double[::1] yv = y_arr
    cdef const cnp.int64_t[::1] cv = c_arr
    cdef Py_ssize_t n = yv.shape[0]
    cdef Py_ssize_t nc = n_cells
    means_arr = np.zeros(nc, dtype=np.float64)
    counts_arr = np.zeros(nc, dtype=np.int64)
    est_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] means = means_arr
    cdef cnp.int64_t[::1] counts = counts_arr
    cdef double[::1] est = est_arr
    cdef Py_ssize_t i
    cdef cnp.int64_t c
    for i in range(n):
        c = cv[i]
        if c < 0 or c >= nc:
            raise ValueError("cell index out of range")
        means[c] += yv[i]
        counts[c] += 1
    for i in range(nc):
        if counts[i] > 0:
            means[i] /= counts[i]
    for i in range(n):
        est[i] = means[cv[i]]
    return est_arr, means_arr, counts_arr
