#!/usr/bin/env python3
"""Benchmark the compiled CSR kernels against the numpy fallback.

Times csr_matvec and richardson_step on random sparse matrices, plus an
end-to-end certified solve driven through each backend.

    python benchmarks/bench_kernels.py --sizes 1000 10000 --density 0.01
"""

import argparse
import time

import numpy as np

from fixpoint import SparseMatrixCOO, StoppingRule
from fixpoint._kernels import _csr_py

try:
    from fixpoint._kernels import _csr_cy
except ImportError:
    _csr_cy = None


def random_contractive_system(rng, n, density):
    """A = I - R with ||R||_inf and ||R||_1 at most 0.9, plus a rhs."""
    nnz = max(1, int(density * n * n))
    rows = rng.integers(0, n, size=nnz)
    cols = rng.integers(0, n, size=nnz)
    vals = rng.uniform(-1.0, 1.0, size=nnz)
    R = SparseMatrixCOO(n, n, rows, cols, vals).canonicalize()
    dense_scale = max(
        np.abs(np.bincount(R.rows, np.abs(R.values), minlength=n)).max(),
        np.abs(np.bincount(R.cols, np.abs(R.values), minlength=n)).max(),
    )
    vals = -R.values * (0.9 / dense_scale)
    entries = {(int(i), int(j)): v for i, j, v in zip(R.rows, R.cols, vals)}
    for i in range(n):
        entries[(i, i)] = entries.get((i, i), 0.0) + 1.0
    keys = sorted(entries)
    A = SparseMatrixCOO(
        n, n,
        np.array([k[0] for k in keys]),
        np.array([k[1] for k in keys]),
        np.array([entries[k] for k in keys]),
    ).to_csr()
    return A, rng.uniform(-1.0, 1.0, size=n)


def best_of(func, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        func()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(A, x, b, repeats):
    args = (A.row_offsets, A.col_indices, A.values, x)
    out = {}
    for name, mod in backends():
        out[name] = (
            best_of(lambda m=mod: m.csr_matvec(*args), repeats),
            best_of(lambda m=mod: m.richardson_step(*args, b), repeats),
        )
    return out


def bench_solve(A, b, repeats):
    from fixpoint import _kernels, sparse

    out = {}
    rule = StoppingRule(tolerance=1e-10)
    saved = _kernels.csr_matvec, _kernels.richardson_step
    try:
        for name, mod in backends():
            _kernels.csr_matvec = mod.csr_matvec
            _kernels.richardson_step = mod.richardson_step
            out[name] = best_of(lambda: sparse.solve_fixed_point(A, b, rule=rule),
                                max(1, repeats // 3))
    finally:
        _kernels.csr_matvec, _kernels.richardson_step = saved
    return out


def backends():
    yield "python", _csr_py
    if _csr_cy is not None:
        yield "cython", _csr_cy


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[1000, 5000, 20000])
    parser.add_argument("--density", type=float, default=0.002)
    parser.add_argument("--repeats", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if _csr_cy is None:
        print("note: compiled backend not available, timing the fallback only")

    rng = np.random.default_rng(args.seed)
    header = f"{'n':>8} {'nnz':>10} {'op':<16} {'python':>12} {'cython':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for n in args.sizes:
        A, b = random_contractive_system(rng, n, args.density)
        x = rng.uniform(-1.0, 1.0, size=n)
        kernel_times = bench_kernels(A, x, b, args.repeats)
        solve_times = bench_solve(A, b, args.repeats)
        for op, idx in (("csr_matvec", 0), ("richardson_step", 1)):
            py = kernel_times["python"][idx]
            cy = kernel_times.get("cython", (None, None))[idx]
            _print_row(n, A.nnz, op, py, cy)
        _print_row(n, A.nnz, "solve (e2e)", solve_times["python"],
                   solve_times.get("cython"))


def _print_row(n, nnz, op, py, cy):
    py_ms = f"{py * 1e3:10.3f}ms"
    if cy is None:
        print(f"{n:>8} {nnz:>10} {op:<16} {py_ms:>12} {'-':>12} {'-':>8}")
    else:
        cy_ms = f"{cy * 1e3:10.3f}ms"
        print(f"{n:>8} {nnz:>10} {op:<16} {py_ms:>12} {cy_ms:>12} {py / cy:>7.1f}x")


if __name__ == "__main__":
    main()
