"""Independent dense direct solver used to cross-check iterative results.

Plain Gaussian elimination with scaled partial pivoting.  Deliberately free
of any fixed-point machinery so it can serve as a second route when
validating solutions, certificates, and error bounds at desk scale.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularMatrixError, TooLargeError

PIVOT_RTOL = 1e-13
DENSIFY_MAX_ELEMENTS = 10**6
VERIFY_MAX_N = 1000


def _as_dense_matrix(a) -> np.ndarray:
    m = np.array(a, dtype=np.float64, copy=True)
    if m.ndim != 2:
        raise ValueError("expected a 2-D array")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def dense_from_sparse(A) -> np.ndarray:
    """Densify a CSR matrix into a row-major 2-D array (n_rows*n_cols <= 1e6)."""
    if A.n_rows * A.n_cols > DENSIFY_MAX_ELEMENTS:
        raise TooLargeError(
            f"refusing to densify {A.n_rows}x{A.n_cols} "
            f"(> {DENSIFY_MAX_ELEMENTS} elements)"
        )
    return A.to_dense()


def _factor_in_place(m: np.ndarray, rhs: np.ndarray | None) -> int:
    """Row-reduce m (and rhs alongside) with scaled partial pivoting.

    Returns the permutation sign.  Raises SingularMatrixError when the best
    available pivot is below PIVOT_RTOL relative to its row scale.
    """
    n = m.shape[0]
    scale = np.max(np.abs(m), axis=1)
    if np.any(scale == 0.0):
        raise SingularMatrixError(
            f"row {int(np.nonzero(scale == 0.0)[0][0])} is entirely zero"
        )
    sign = 1
    for k in range(n):
        p = k + int(np.argmax(np.abs(m[k:, k]) / scale[k:]))
        if abs(m[p, k]) < PIVOT_RTOL * scale[p]:
            raise SingularMatrixError(
                f"no usable pivot in column {k} "
                f"(best {abs(m[p, k]):.3e} against row scale {scale[p]:.3e})"
            )
        if p != k:
            m[[k, p]] = m[[p, k]]
            scale[[k, p]] = scale[[p, k]]
            if rhs is not None:
                rhs[[k, p]] = rhs[[p, k]]
            sign = -sign
        factors = m[k + 1:, k] / m[k, k]
        m[k + 1:, k:] -= np.outer(factors, m[k, k:])
        if rhs is not None:
            rhs[k + 1:] -= factors * rhs[k]
    return sign


def dense_solve(A, b) -> np.ndarray:
    """Solve the square dense system Ax = b by Gaussian elimination."""
    m = _as_dense_matrix(A)
    n = m.shape[0]
    if m.shape[1] != n:
        raise ValueError(f"matrix is {m.shape[0]}x{m.shape[1]}, expected square")
    x = np.array(b, dtype=np.float64, copy=True).reshape(-1)
    if x.shape[0] != n:
        raise ValueError(f"rhs has length {x.shape[0]}, expected {n}")
    _factor_in_place(m, x)
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - m[k, k + 1:] @ x[k + 1:]) / m[k, k]
    return x


def dense_determinant(A) -> float:
    """Determinant via the same pivoted elimination; 0.0 for a matrix the
    elimination flags as singular."""
    m = _as_dense_matrix(A)
    if m.shape[1] != m.shape[0]:
        raise ValueError(f"matrix is {m.shape[0]}x{m.shape[1]}, expected square")
    if m.shape[0] == 0:
        return 1.0
    try:
        sign = _factor_in_place(m, None)
    except SingularMatrixError:
        return 0.0
    return float(sign * np.prod(np.diag(m)))


def solve_sparse_system(A, b) -> np.ndarray:
    """Densify-and-solve convenience for cross-checking sparse solves."""
    if A.n_rows > VERIFY_MAX_N:
        raise TooLargeError(
            f"oracle verification limited to n <= {VERIFY_MAX_N}, got {A.n_rows}"
        )
    return dense_solve(dense_from_sparse(A), b)
