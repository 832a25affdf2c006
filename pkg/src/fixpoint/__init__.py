"""Certified fixed-point solving toolkit.

Contraction-mapping machinery for sparse linear systems, Fredholm integral
equations of the second kind, and scalar self-maps, with a-priori and
a-posteriori error bounds and machine-readable convergence certificates.
"""

from ._kernels import BACKEND as kernel_backend_name
from .errors import (
    DimensionMismatchError,
    ExpressionError,
    FixpointError,
    InsufficientDataError,
    NonFiniteError,
    NotContractiveError,
    NotSelfMapError,
    NotSquareError,
    ParseError,
    SingularMatrixError,
    TooLargeError,
    UnsupportedFormatError,
    ZeroDiagonalError,
)
from .fredholm import (
    DiscretizedFredholm,
    FredholmSolution,
    Kernel,
    discretize,
    kernel_l2_norm,
    nystrom_eval,
    nystrom_residual,
    quadrature_nodes,
    sin_kernel_map,
    solve_fredholm,
    solve_sin_kernel,
)
from .io_formats import (
    CertificateDocument,
    certificate_from_json,
    certificate_to_json,
    read_matrix_market,
    read_vector,
    write_matrix_market,
    write_vector,
)
from .metric import (
    FixedPointMap,
    FixedPointResult,
    IterationStatus,
    IterationTrace,
    StoppingRule,
    a_posteriori_error_bound,
    a_priori_error_bound,
    a_priori_iteration_count,
    banach_iterate,
    estimate_contraction_factor,
)
from .oracle import dense_determinant, dense_from_sparse, dense_solve
from .scalar import (
    ScalarProblem,
    estimate_lipschitz,
    solve_scalar_detailed,
    solve_scalar_fixed_point,
)
from .sparse import (
    ContractionCertificate,
    SolveReport,
    SparseMatrixCOO,
    SparseMatrixCSR,
    certify,
    determinant_diagnostic,
    iteration_matrix_norm,
    jacobi_precondition,
    residual_norm,
    solve_fixed_point,
    spmv,
)

__version__ = "0.1.0"


def kernel_backend() -> str:
    """Which CSR kernel backend is active: "cython" or "python"."""
    return kernel_backend_name
