"""Sparse linear systems Ax = b solved through the fixed-point map
T(x) = x - Ax + b, with contraction certification via operator norms of the
iteration matrix I - A.

The certificate computes the infinity, one, and Frobenius norms of I - A
without densifying.  Any of them below 1 guarantees a unique solution and
convergence of the iteration.  Error bounds in the Euclidean metric use the
Euclidean-safe factor min(frobenius, sqrt(one * infinity)), both of which
dominate the spectral norm; the infinity or one norm alone does not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels, oracle
from .errors import (
    DimensionMismatchError,
    NotContractiveError,
    NotSquareError,
    TooLargeError,
    ZeroDiagonalError,
)
from .metric import FixedPointMap, FixedPointResult, IterationTrace, StoppingRule, banach_iterate

INFINITY_NORM = "infinity"
ONE_NORM = "one"
FROBENIUS_NORM = "frobenius"
NORM_KINDS = (INFINITY_NORM, ONE_NORM, FROBENIUS_NORM)

CONTRACTIVE = "contractive"
NOT_CONTRACTIVE = "not_contractive"

DETERMINANT_MAX_N = 12

JACOBI = "jacobi"
NO_PRECONDITIONER = "none"


def as_vector(values, length: int | None = None, name: str = "vector") -> np.ndarray:
    """Coerce to a read-only 1-D float64 array with finite entries."""
    v = np.array(values, dtype=np.float64, copy=True).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    if length is not None and v.shape[0] != length:
        raise DimensionMismatchError(
            f"{name} has length {v.shape[0]}, expected {length}"
        )
    v.flags.writeable = False
    return v


def euclidean_distance(u: np.ndarray, v: np.ndarray) -> float:
    return float(np.linalg.norm(u - v))


def _as_index_array(values, n: int, name: str) -> np.ndarray:
    idx = np.array(values, dtype=np.int64, copy=True).reshape(-1)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ValueError(f"{name} indices out of range [0, {n})")
    return idx


@dataclass(frozen=True, eq=False)
class SparseMatrixCOO:
    """Triplet-form sparse matrix. May hold duplicates and explicit zeros
    until :meth:`canonicalize`."""

    n_rows: int
    n_cols: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.n_rows < 0 or self.n_cols < 0:
            raise ValueError("matrix dimensions must be non-negative")
        rows = _as_index_array(self.rows, self.n_rows, "row")
        cols = _as_index_array(self.cols, self.n_cols, "column")
        values = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        if not (rows.shape == cols.shape == values.shape):
            raise ValueError("rows, cols, values must have equal lengths")
        if not np.all(np.isfinite(values)):
            raise ValueError("matrix values must be finite")
        for arr, field_name in ((rows, "rows"), (cols, "cols"), (values, "values")):
            arr.flags.writeable = False
            object.__setattr__(self, field_name, arr)

    @classmethod
    def from_triplets(cls, n_rows, n_cols, triplets) -> "SparseMatrixCOO":
        triplets = list(triplets)
        rows = [t[0] for t in triplets]
        cols = [t[1] for t in triplets]
        vals = [t[2] for t in triplets]
        return cls(n_rows, n_cols, np.array(rows, dtype=np.int64),
                   np.array(cols, dtype=np.int64), np.array(vals, dtype=np.float64))

    @classmethod
    def from_dense(cls, array) -> "SparseMatrixCOO":
        a = np.asarray(array, dtype=np.float64)
        if a.ndim != 2:
            raise ValueError("expected a 2-D array")
        rows, cols = np.nonzero(a)
        return cls(a.shape[0], a.shape[1], rows.astype(np.int64),
                   cols.astype(np.int64), a[rows, cols])

    @property
    def nnz(self) -> int:
        return int(self.values.shape[0])

    def is_canonical(self) -> bool:
        if self.nnz == 0:
            return True
        keys = self.rows * self.n_cols + self.cols
        return bool(np.all(np.diff(keys) > 0) and np.all(self.values != 0.0))

    def canonicalize(self) -> "SparseMatrixCOO":
        """Sort row-major, sum duplicate coordinates, drop exact zeros."""
        if self.nnz == 0:
            return self
        order = np.lexsort((self.cols, self.rows))
        r = self.rows[order]
        c = self.cols[order]
        v = self.values[order]
        new_group = np.empty(r.shape[0], dtype=bool)
        new_group[0] = True
        new_group[1:] = (r[1:] != r[:-1]) | (c[1:] != c[:-1])
        group = np.cumsum(new_group) - 1
        summed = np.bincount(group, weights=v)
        first = np.nonzero(new_group)[0]
        keep = summed != 0.0
        return SparseMatrixCOO(self.n_rows, self.n_cols,
                               r[first][keep], c[first][keep], summed[keep])

    def to_csr(self) -> "SparseMatrixCSR":
        canon = self if self.is_canonical() else self.canonicalize()
        counts = np.bincount(canon.rows, minlength=self.n_rows).astype(np.int64)
        offsets = np.zeros(self.n_rows + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        return SparseMatrixCSR(self.n_rows, self.n_cols, offsets,
                               canon.cols, canon.values)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols))
        np.add.at(out, (self.rows, self.cols), self.values)
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrixCOO):
            return NotImplemented
        return (self.n_rows == other.n_rows and self.n_cols == other.n_cols
                and np.array_equal(self.rows, other.rows)
                and np.array_equal(self.cols, other.cols)
                and np.array_equal(self.values, other.values))


@dataclass(frozen=True, eq=False)
class SparseMatrixCSR:
    """Compressed sparse row matrix with strictly increasing column indices
    inside each row."""

    n_rows: int
    n_cols: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        offsets = np.array(self.row_offsets, dtype=np.int64, copy=True).reshape(-1)
        cols = _as_index_array(self.col_indices, self.n_cols, "column")
        values = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        if offsets.shape[0] != self.n_rows + 1:
            raise ValueError("row_offsets must have length n_rows + 1")
        if offsets[0] != 0 or offsets[-1] != values.shape[0]:
            raise ValueError("row_offsets must start at 0 and end at nnz")
        if np.any(np.diff(offsets) < 0):
            raise ValueError("row_offsets must be nondecreasing")
        if cols.shape[0] != values.shape[0]:
            raise ValueError("col_indices and values must have equal lengths")
        if not np.all(np.isfinite(values)):
            raise ValueError("matrix values must be finite")
        for start, end in zip(offsets[:-1], offsets[1:]):
            if end - start > 1 and np.any(np.diff(cols[start:end]) <= 0):
                raise ValueError("column indices must strictly increase within a row")
        for arr, field_name in ((offsets, "row_offsets"), (cols, "col_indices"),
                                (values, "values")):
            arr.flags.writeable = False
            object.__setattr__(self, field_name, arr)

    @property
    def nnz(self) -> int:
        return int(self.values.shape[0])

    @property
    def is_square(self) -> bool:
        return self.n_rows == self.n_cols

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    def expanded_rows(self) -> np.ndarray:
        """Row index of each stored entry, aligned with col_indices/values."""
        return np.repeat(np.arange(self.n_rows, dtype=np.int64),
                         np.diff(self.row_offsets))

    def diagonal(self) -> np.ndarray:
        """Stored diagonal entries; implicit zeros stay zero."""
        n = min(self.n_rows, self.n_cols)
        diag = np.zeros(n)
        rows = self.expanded_rows()
        mask = rows == self.col_indices
        diag[rows[mask]] = self.values[mask]
        return diag

    def to_coo(self) -> SparseMatrixCOO:
        return SparseMatrixCOO(self.n_rows, self.n_cols, self.expanded_rows(),
                               self.col_indices, self.values)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols))
        out[self.expanded_rows(), self.col_indices] = self.values
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrixCSR):
            return NotImplemented
        return (self.n_rows == other.n_rows and self.n_cols == other.n_cols
                and np.array_equal(self.row_offsets, other.row_offsets)
                and np.array_equal(self.col_indices, other.col_indices)
                and np.array_equal(self.values, other.values))


@dataclass(frozen=True)
class ContractionCertificate:
    """Norm-based contraction verdict for the iteration matrix I - A.

    ``value`` is the smallest computed norm and ``norm_kind`` names it; the
    verdict is contractive exactly when that minimum is below 1.
    """

    norm_kind: str
    value: float
    verdict: str
    per_norm_values: dict
    determinant_diagnostic: float | None = None

    @property
    def is_contractive(self) -> bool:
        return self.verdict == CONTRACTIVE

    @property
    def euclidean_factor(self) -> float:
        """Upper bound for the Euclidean step contraction factor:
        min(frobenius, sqrt(one * infinity)) >= spectral norm of I - A."""
        fro = self.per_norm_values[FROBENIUS_NORM]
        mixed = math.sqrt(self.per_norm_values[ONE_NORM]
                          * self.per_norm_values[INFINITY_NORM])
        return min(fro, mixed)


@dataclass(frozen=True)
class SolveReport:
    """Everything produced by one fixed-point solve."""

    solution: np.ndarray
    residual_norm: float
    residual_tolerance: float
    certificate: ContractionCertificate
    fixed_point: FixedPointResult
    preconditioner: str
    trace: IterationTrace


def _require_square(A: SparseMatrixCSR) -> None:
    if not A.is_square:
        raise NotSquareError(f"matrix is {A.n_rows}x{A.n_cols}")


def spmv(A: SparseMatrixCSR, x: np.ndarray) -> np.ndarray:
    """Sparse matrix - dense vector product A @ x."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != A.n_cols:
        raise DimensionMismatchError(
            f"matrix has {A.n_cols} columns, vector has length {x.shape[0]}"
        )
    return _kernels.csr_matvec(A.row_offsets, A.col_indices, A.values, x)


def residual_norm(A: SparseMatrixCSR, x: np.ndarray, b: np.ndarray) -> float:
    """Euclidean norm of A @ x - b."""
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if b.shape[0] != A.n_rows:
        raise DimensionMismatchError(
            f"matrix has {A.n_rows} rows, rhs has length {b.shape[0]}"
        )
    return float(np.linalg.norm(spmv(A, x) - b))


def _iteration_matrix_entry_data(A: SparseMatrixCSR):
    rows = A.expanded_rows()
    is_diag = rows == A.col_indices
    has_stored_diag = np.zeros(A.n_rows, dtype=bool)
    has_stored_diag[rows[is_diag]] = True
    return rows, is_diag, has_stored_diag


def iteration_matrix_norm(A: SparseMatrixCSR, kind: str) -> float:
    """Norm of I - A computed from the sparse storage.

    Diagonal entries contribute |1 - a_ii|; rows without a stored diagonal
    contribute the implicit |1 - 0| = 1.
    """
    _require_square(A)
    if kind not in NORM_KINDS:
        raise ValueError(f"unknown norm kind {kind!r}")
    n = A.n_rows
    if n == 0:
        return 0.0
    rows, is_diag, has_stored_diag = _iteration_matrix_entry_data(A)

    if kind == FROBENIUS_NORM:
        sq = np.square(A.values)
        sq = np.where(is_diag, np.square(1.0 - A.values), sq)
        total = float(sq.sum()) + float(np.count_nonzero(~has_stored_diag))
        return math.sqrt(total)

    contrib = np.abs(A.values)
    contrib = np.where(is_diag, np.abs(1.0 - A.values), contrib)
    axis = rows if kind == INFINITY_NORM else A.col_indices
    sums = np.bincount(axis, weights=contrib, minlength=n)
    sums[~has_stored_diag] += 1.0
    return float(sums.max())


def certify(A: SparseMatrixCSR) -> ContractionCertificate:
    """Compute all norms of I - A and attach the determinant diagnostic for
    small matrices (n <= 12).  Never densifies for the norms themselves."""
    _require_square(A)
    norms = {kind: iteration_matrix_norm(A, kind) for kind in NORM_KINDS}
    best = min(NORM_KINDS, key=lambda kind: norms[kind])
    det = determinant_diagnostic(A) if A.n_rows <= DETERMINANT_MAX_N else None
    return ContractionCertificate(
        norm_kind=best,
        value=norms[best],
        verdict=CONTRACTIVE if norms[best] < 1.0 else NOT_CONTRACTIVE,
        per_norm_values=norms,
        determinant_diagnostic=det,
    )


def determinant_diagnostic(A: SparseMatrixCSR) -> float:
    """det(I - A), densified, for n <= 12.

    Diagnostic only: a small determinant does not certify contraction (the
    iteration can diverge with det(I - A) well below 1).
    """
    _require_square(A)
    if A.n_rows > DETERMINANT_MAX_N:
        raise TooLargeError(
            f"determinant diagnostic limited to n <= {DETERMINANT_MAX_N}, got {A.n_rows}"
        )
    m = np.eye(A.n_rows) - A.to_dense()
    return oracle.dense_determinant(m)


def jacobi_precondition(
    A: SparseMatrixCSR, b: np.ndarray
) -> tuple[SparseMatrixCSR, np.ndarray]:
    """Left-scale the system by the inverse diagonal: (D^-1 A, D^-1 b).

    The scaled system has the same solution set.  Raises
    :class:`ZeroDiagonalError` at the first zero (or missing) diagonal entry.
    """
    _require_square(A)
    b = as_vector(b, A.n_rows, "rhs")
    diag = A.diagonal()
    zero = np.nonzero(diag == 0.0)[0]
    if zero.size:
        raise ZeroDiagonalError(int(zero[0]))
    scaled_values = A.values / diag[A.expanded_rows()]
    scaled = SparseMatrixCSR(A.n_rows, A.n_cols, A.row_offsets,
                             A.col_indices, scaled_values)
    return scaled, b / diag


def solve_fixed_point(
    A: SparseMatrixCSR,
    b: np.ndarray,
    x0: np.ndarray | None = None,
    rule: StoppingRule | None = None,
    precondition: str = NO_PRECONDITIONER,
    force: bool = False,
) -> SolveReport:
    """Solve Ax = b by iterating T(x) = x - Ax + b in the Euclidean metric.

    Refuses when no norm of I - A is below 1 unless ``force`` is set; forced
    runs rely on divergence detection.  When the certificate admits a
    Euclidean-safe contraction factor the stopping rule switches to the
    a-posteriori criterion and the result carries error bounds.
    """
    _require_square(A)
    b = as_vector(b, A.n_rows, "rhs")
    if precondition not in (NO_PRECONDITIONER, JACOBI):
        raise ValueError(f"unknown preconditioner {precondition!r}")
    if precondition == JACOBI:
        A, b = jacobi_precondition(A, b)

    certificate = certify(A)
    if not certificate.is_contractive and not force:
        raise NotContractiveError(
            "no operator norm of I - A is below 1 "
            f"(best: {certificate.norm_kind} = {certificate.value:.6g}); "
            "pass force=True to iterate anyway"
        )

    rule = rule if rule is not None else StoppingRule()
    if rule.q_for_bounds is None:
        q = certificate.euclidean_factor
        if q < 1.0:
            rule = replace(rule, q_for_bounds=q)

    x0 = np.zeros(A.n_rows) if x0 is None else as_vector(x0, A.n_rows, "x0")
    offsets, cols, vals = A.row_offsets, A.col_indices, A.values
    fp_map = FixedPointMap(
        apply=lambda x: _kernels.richardson_step(offsets, cols, vals, x, b),
        distance=euclidean_distance,
    )
    result, trace = banach_iterate(fp_map, x0, rule)
    return SolveReport(
        solution=result.point,
        residual_norm=residual_norm(A, result.point, b),
        residual_tolerance=rule.tolerance * (1.0 + float(np.linalg.norm(b))),
        certificate=certificate,
        fixed_point=result,
        preconditioner=precondition,
        trace=trace,
    )
