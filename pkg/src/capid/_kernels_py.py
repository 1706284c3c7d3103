"""Numpy implementations of the hot kernels.

Behavioral twin of the compiled extension in ``capid._kernels``: same
signatures, dtypes, and edge cases. Selection happens in ``capid.kernels``.
"""

import numpy as np

# Cap on floats held by one chunk of the evaluation table (about 32 MB).
_CHUNK_FLOATS = 1 << 22


def multilinear_eval(values, mu):
    """Aggregate each row of `values` with the set-function vector `mu`.

    `values` is (n, m) with entries in [0, 1]; `mu` has length 2^m and is
    bitmask-indexed. Each row costs O(2^m): the table of subset weights is
    contracted one criterion at a time, interpolating between the
    without-j and with-j halves at the row's degree of satisfaction.
    """
    v = np.ascontiguousarray(values, dtype=np.float64)
    if v.ndim != 2:
        raise ValueError("values must be a 2-d array")
    n, m = v.shape
    table = np.ascontiguousarray(mu, dtype=np.float64)
    if table.shape != (1 << m,):
        raise ValueError(f"mu must have length {1 << m}, got {table.shape}")
    out = np.empty(n, dtype=np.float64)
    chunk = max(1, _CHUNK_FLOATS >> m)
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        t = np.broadcast_to(table, (hi - lo, 1 << m)).copy()
        for j in range(m):
            x = v[lo:hi, j : j + 1]
            t = t[:, 0::2] * (1.0 - x) + t[:, 1::2] * x
        out[lo:hi] = t[:, 0]
    return out


def group_mean_estimate(y, cells, n_cells):
    """Mean of `y` within each cell, expanded back to rows.

    `cells` assigns each row of `y` an integer cell in [0, n_cells).
    Returns (estimate, means, counts) where estimate[i] = means[cells[i]];
    cells with no rows keep mean 0.0.
    """
    y = np.ascontiguousarray(y, dtype=np.float64)
    cells = np.ascontiguousarray(cells, dtype=np.int64)
    if y.shape != cells.shape or y.ndim != 1:
        raise ValueError("y and cells must be 1-d arrays of equal length")
    if cells.size and (cells.min() < 0 or cells.max() >= n_cells):
        raise ValueError("cell index out of range")
    counts = np.bincount(cells, minlength=n_cells)
    sums = np.bincount(cells, weights=y, minlength=n_cells)
    means = np.zeros(n_cells, dtype=np.float64)
    populated = counts > 0
    means[populated] = sums[populated] / counts[populated]
    return means[cells], means, counts.astype(np.int64)
