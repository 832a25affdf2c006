"""End-to-end acceptance checks for the toolkit's documented guarantees.

Each test prints one ACCEPTANCE line on success.  Run with ``pytest -s``
to see them.

Known-red check: test_a2_sparse6x6_oracle_recovery.  The shipped 6x6
fixture matrix is rank 5 (columns 1 and 2 are linearly dependent), so the
reference vector (1,1,1,0,1,1) is only one member of a one-parameter
solution family.  No direct solver can recover that particular member; the
elimination oracle correctly reports the matrix as singular.  The check is
kept as stated to document the defect rather than weakened to pass.
"""

import contextlib
import io
import math
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import (
    DENSE_3X3,
    FIXTURES,
    RHS_3X3,
    RHS_6X6,
    SAMPLE_SOLUTION_6X6,
    SOLUTION_3X3,
    bisect_root,
    csr_from_dense,
    dense_6x6,
    random_contractive_system_with_margin,
)
from fixpoint import (
    Kernel,
    NotContractiveError,
    StoppingRule,
    a_posteriori_error_bound,
    a_priori_error_bound,
    a_priori_iteration_count,
    certify,
    dense_solve,
    determinant_diagnostic,
    discretize,
    estimate_lipschitz,
    kernel_l2_norm,
    read_matrix_market,
    residual_norm,
    solve_fixed_point,
    solve_fredholm,
    solve_scalar_fixed_point,
    solve_sin_kernel,
    spmv,
    write_matrix_market,
)
from fixpoint.cli import run
from fixpoint.scalar import ScalarProblem
from fixpoint.sparse import FROBENIUS_NORM, INFINITY_NORM, ONE_NORM

SUITE_TOLERANCE = 1e-10


def best_time(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


@pytest.fixture(scope="module")
def bound_suite():
    """50 random certified-contractive systems, n <= 50, with the infinity
    and one norms of I - A at most 0.9 by construction, solved at 1e-10
    alongside the dense oracle solution."""
    rng = np.random.default_rng(2026)
    suite = []
    t0 = time.perf_counter()
    for _ in range(50):
        n = int(rng.integers(4, 51))
        A, b = random_contractive_system_with_margin(rng, n)
        report = solve_fixed_point(A, b, rule=StoppingRule(tolerance=SUITE_TOLERANCE))
        x_oracle = dense_solve(A.to_dense(), b)
        suite.append((A, b, report, x_oracle))
    elapsed = time.perf_counter() - t0
    return suite, elapsed


def test_a1_noncontractive_3x3_reproduction():
    A = csr_from_dense(DENSE_3X3)

    def workload():
        x = dense_solve(DENSE_3X3, RHS_3X3)
        det = determinant_diagnostic(A)
        cert = certify(A)
        return x, det, cert

    x, det, cert = workload()
    np.testing.assert_allclose(x, SOLUTION_3X3, atol=1e-10)
    assert det == pytest.approx(0.5, abs=1e-12)
    assert not cert.is_contractive
    assert cert.per_norm_values[INFINITY_NORM] == pytest.approx(1.5, abs=1e-12)
    assert cert.per_norm_values[ONE_NORM] >= 1.0
    assert cert.per_norm_values[FROBENIUS_NORM] >= 1.0
    elapsed = best_time(workload)
    assert elapsed < 1e-3
    print(f"\nACCEPTANCE PASS: 3x3 oracle solution, determinant 0.5, "
          f"not-contractive certificate ({elapsed * 1e6:.0f} us)")


def test_a2_sparse6x6_product_and_residual():
    A = csr_from_dense(dense_6x6())

    def workload():
        y = spmv(A, SAMPLE_SOLUTION_6X6)
        r = residual_norm(A, SAMPLE_SOLUTION_6X6, RHS_6X6)
        return y, r

    y, r = workload()
    np.testing.assert_allclose(y, RHS_6X6, rtol=1e-12)
    assert r <= 1e-12
    elapsed = best_time(workload)
    assert elapsed < 1e-3
    print(f"\nACCEPTANCE PASS: 6x6 product matches the reference rhs, "
          f"zero residual ({elapsed * 1e6:.0f} us)")


def test_a2_sparse6x6_oracle_recovery():
    # Faithful as stated; red by design: the matrix is singular (rank 5),
    # so elimination raises instead of returning the reference vector.
    x = dense_solve(dense_6x6(), RHS_6X6)
    np.testing.assert_allclose(x, SAMPLE_SOLUTION_6X6, atol=1e-10)
    print("\nACCEPTANCE PASS: 6x6 oracle recovery")


def test_a3_jacobi_diagonal_one_step():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = int(rng.integers(1, 101))
        diag = rng.uniform(0.1, 100.0, size=n) * rng.choice([-1.0, 1.0], size=n)
        A = csr_from_dense(np.diag(diag))
        b = rng.uniform(-10.0, 10.0, size=n)
        report = solve_fixed_point(A, b, precondition="jacobi")
        assert report.fixed_point.iterations == 1
        assert report.certificate.value == 0.0
        np.testing.assert_allclose(report.solution, b / diag, rtol=1e-12)
    print("\nACCEPTANCE PASS: 100 random diagonal systems solve in exactly "
          "one Jacobi-preconditioned iteration with certificate value 0")


def test_a4_error_bounds_dominate_true_error(bound_suite):
    suite, elapsed = bound_suite
    checked = 0
    for A, b, report, x_oracle in suite:
        q = report.certificate.euclidean_factor
        assert q < 1.0
        trace = report.trace
        assert trace.iterates_complete
        d1 = trace.step_distances[0]
        for k in range(1, trace.n_steps + 1):
            err = float(np.linalg.norm(trace.iterates[k] - x_oracle))
            assert err <= a_priori_error_bound(q, k, d1)
            assert err <= a_posteriori_error_bound(q, trace.step_distances[k - 1])
            checked += 1
        if d1 > 0.0:
            budget = a_priori_iteration_count(q, d1, SUITE_TOLERANCE)
            assert report.fixed_point.iterations <= budget
    assert elapsed < 5.0
    print(f"\nACCEPTANCE PASS: a-priori and a-posteriori bounds dominate the "
          f"oracle distance at {checked} iterates across 50 systems "
          f"({elapsed:.2f} s)")


def test_a5_step_ratios_below_certified_factor(bound_suite):
    suite, _ = bound_suite
    checked = 0
    for _, _, report, _ in suite:
        q = report.certificate.euclidean_factor
        for ratio in report.trace.step_ratios():
            assert ratio <= q + 1e-12
            checked += 1
    assert checked > 0
    print(f"\nACCEPTANCE PASS: {checked} consecutive step ratios stay below "
          f"the certified factor plus 1e-12")


def test_a6_separable_kernel_closed_form():
    kernel = Kernel(lambda x, y: x * y, 0.0, 1.0)

    def workload():
        disc = discretize(kernel, lambda x: x, u=1.0, n_nodes=64)
        return disc, solve_fredholm(disc, StoppingRule(tolerance=1e-10))

    disc, solution = workload()
    max_err = float(np.max(np.abs(solution.f_samples - 1.5 * disc.nodes)))
    assert max_err <= 1e-6
    assert kernel_l2_norm(kernel, 64) == pytest.approx(1.0 / 3.0, abs=1e-6)
    with pytest.raises(NotContractiveError):
        solve_fredholm(discretize(kernel, lambda x: x, u=3.0, n_nodes=64))
    elapsed = best_time(workload)
    assert elapsed < 0.1
    print(f"\nACCEPTANCE PASS: separable kernel solution within 1e-6 of "
          f"1.5x, kernel norm 1/3, boundary scale refused ({elapsed * 1e3:.1f} ms)")


def test_a7_sin_kernel_reproduction():
    phi = lambda c: (math.cos(c - 1.0) - math.cos(c)) / 2.0
    c_star = bisect_root(lambda c: c - phi(c), -1.0, 0.0)
    rule = StoppingRule(tolerance=1e-10)

    def workload():
        return solve_sin_kernel(rule, start=0.0), solve_sin_kernel(rule, start=1.0)

    from_zero, from_one = workload()
    gap = float(np.max(np.abs(from_zero.f_samples - from_one.f_samples)))
    assert gap <= 2e-10
    for solution in (from_zero, from_one):
        np.testing.assert_allclose(solution.f_samples, c_star, atol=1e-9)
        for ratio in solution.trace.step_ratios():
            assert ratio <= 0.5 + 1e-9
    elapsed = best_time(workload)
    assert elapsed < 1e-2
    print(f"\nACCEPTANCE PASS: averaged-sine map converges from 0 and 1 to "
          f"the bisection constant {c_star:.6f} ({elapsed * 1e3:.2f} ms)")


def test_a8_scalar_cosine_suite():
    problem = ScalarProblem(math.cos, 0.0, 1.0)
    oracle = bisect_root(lambda x: math.cos(x) - x, 0.0, 1.0)
    result = solve_scalar_fixed_point(problem, tol=1e-10)
    assert result.point == pytest.approx(oracle, abs=1e-9)
    k_hat = estimate_lipschitz(problem, 1024)
    assert k_hat == pytest.approx(math.sin(1.0), abs=1e-3)
    print("\nACCEPTANCE PASS: cos(x) fixed point matches the bisection "
          "oracle to 1e-9; Lipschitz estimate within 1e-3 of sin(1)")


def _cli_stdout(argv) -> str:
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        run(argv)
    return out.getvalue()


def test_a9_io_determinism(tmp_path):
    fixtures = sorted(FIXTURES.glob("*.mtx"))
    assert fixtures
    for path in fixtures:
        coo = read_matrix_market(path)
        text = write_matrix_market(coo)
        assert read_matrix_market(io.StringIO(text)) == coo
        assert write_matrix_market(read_matrix_market(io.StringIO(text))) == text
        # shipped fixtures are canonical, so the round trip reproduces the
        # file byte for byte
        assert text == Path(path).read_text()

    commands = [["certify", str(p), "--output", fmt]
                for p in fixtures for fmt in ("text", "json")]
    commands += [
        ["solve", "--matrix", str(FIXTURES / "contractive2x2.mtx"),
         "--rhs", str(FIXTURES / "contractive2x2_rhs.txt")],
        ["solve", "--matrix", str(FIXTURES / "diagonal6x6.mtx"),
         "--rhs", str(FIXTURES / "diagonal6x6_rhs.txt"),
         "--precondition", "jacobi", "--output", "json"],
    ]
    for argv in commands:
        assert _cli_stdout(argv) == _cli_stdout(argv)
    print(f"\nACCEPTANCE PASS: matrix round-trips are exact and {len(commands)} "
          f"command invocations are bitwise reproducible")
