from pathlib import Path

import numpy as np
import pytest

from fixpoint import SparseMatrixCOO

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


def csr_from_dense(array):
    return SparseMatrixCOO.from_dense(np.asarray(array, dtype=float)).to_csr()


def random_sparse(rng, n_rows, n_cols, density=0.3):
    """Random COO with roughly the requested density (duplicates allowed)."""
    nnz = max(1, int(density * n_rows * n_cols))
    return SparseMatrixCOO(
        n_rows, n_cols,
        rng.integers(0, n_rows, size=nnz),
        rng.integers(0, n_cols, size=nnz),
        rng.uniform(-5.0, 5.0, size=nnz),
    )


def random_contractive_system(rng, n, density=0.3, bound=0.9):
    """A = I - R with both the row-sum and column-sum norms of R scaled to
    ``bound``, so every certificate route sees a contraction; returns (A, b).
    """
    R = random_sparse(rng, n, n, density).canonicalize().to_csr()
    row_sums = np.bincount(R.expanded_rows(), np.abs(R.values), minlength=n)
    col_sums = np.bincount(R.col_indices, np.abs(R.values), minlength=n)
    scale = bound / max(row_sums.max(), col_sums.max())
    dense = -R.to_dense() * scale
    dense[np.diag_indices(n)] += 1.0
    A = csr_from_dense(dense)
    b = rng.uniform(-3.0, 3.0, size=n)
    return A, b


def random_contractive_system_with_margin(rng, n, density=0.3, bound=0.9,
                                          margin=0.02):
    """Like random_contractive_system, but resamples until the certified
    Euclidean factor exceeds the true spectral norm of I - A by ``margin``.

    Observed step ratios approach the spectral factor plus rounding noise of
    order eps*scale/step, so razor-tight certificates (where both coincide)
    would make ratio-vs-certificate checks depend on that noise.
    """
    from fixpoint import certify

    while True:
        A, b = random_contractive_system(rng, n, density, bound)
        gap = certify(A).euclidean_factor - np.linalg.norm(
            np.eye(n) - A.to_dense(), 2
        )
        if gap >= margin:
            return A, b


# 3x3 system: unique solution (10/3, -3, 6), det(I - A) = 1/2, yet no
# operator norm of I - A is below 1 (iteration diverges).
DENSE_3X3 = np.array([
    [1.5, 1.0, 0.0],
    [0.0, 1.0, 1.0],
    [0.0, 1.0, 2.0 / 3.0],
])
RHS_3X3 = np.array([2.0, 3.0, 1.0])
SOLUTION_3X3 = np.array([10.0 / 3.0, -3.0, 6.0])

# 6x6 upper-triangular sparse system, rank 5 (columns 1 and 2 are
# dependent): the sample solution below has zero residual but is not unique.
TRIPLETS_6X6 = [
    (0, 0, 11.0), (0, 1, 22.0), (1, 2, 44.0), (2, 2, 2.0), (2, 3, 66.0),
    (3, 4, 77.0), (4, 4, 88.0), (4, 5, 99.0), (5, 5, 1.0 / 1111.0),
]
RHS_6X6 = np.array([33.0, 44.0, 2.0, 77.0, 187.0, 1.0 / 1111.0])
SAMPLE_SOLUTION_6X6 = np.array([1.0, 1.0, 1.0, 0.0, 1.0, 1.0])


def dense_6x6():
    a = np.zeros((6, 6))
    for i, j, v in TRIPLETS_6X6:
        a[i, j] = v
    return a


def bisect_root(f, lo, hi, tol=1e-14):
    """Plain bisection; assumes a sign change on [lo, hi]."""
    flo = f(lo)
    if flo == 0.0:
        return lo
    for _ in range(200):
        mid = (lo + hi) / 2.0
        fm = f(mid)
        if flo * fm <= 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
        if hi - lo < tol:
            break
    return (lo + hi) / 2.0
