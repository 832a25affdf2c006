"""Numpy fallback implementations of the CSR hot loops.

Semantically identical to the compiled versions in ``_csr_cy``; used when
the extension is not built or when ``FIXPOINT_PURE_PYTHON`` is set.
"""

import numpy as np

BACKEND = "python"


def csr_matvec(row_offsets, col_indices, values, x):
    """y = A @ x for a CSR matrix. Row sums accumulate in storage order."""
    n_rows = row_offsets.shape[0] - 1
    if values.shape[0] == 0:
        return np.zeros(n_rows)
    counts = np.diff(row_offsets)
    rows = np.repeat(np.arange(n_rows), counts)
    return np.bincount(rows, weights=values * x[col_indices], minlength=n_rows)


def richardson_step(row_offsets, col_indices, values, x, b):
    """One sweep of y = (x - A @ x) + b."""
    return (x - csr_matvec(row_offsets, col_indices, values, x)) + b
