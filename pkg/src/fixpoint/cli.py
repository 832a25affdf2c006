"""Command-line driver.

Exit codes: 0 on success (converged solve or contractive verdict), 2 when
the mathematics refuses (not contractive, divergence, exhausted budget,
zero diagonal, not a self-map), 1 on usage or input-file errors.  Output is
bitwise deterministic for identical inputs.
"""

from __future__ import annotations

import argparse
import ast
import csv
import dataclasses
import math
import sys

import numpy as np

from . import fredholm as fr
from . import io_formats, oracle, scalar, sparse
from .errors import (
    ExpressionError,
    FixpointError,
    NotContractiveError,
    NotSelfMapError,
    ZeroDiagonalError,
)
from .metric import IterationStatus, StoppingRule

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_REFUSED = 2

NORM_CHOICES = {
    "inf": (sparse.INFINITY_NORM,),
    "one": (sparse.ONE_NORM,),
    "fro": (sparse.FROBENIUS_NORM,),
    "all": sparse.NORM_KINDS,
}

_MATH_FUNCS = {
    name: getattr(math, name)
    for name in (
        "sin", "cos", "tan", "asin", "acos", "atan", "sinh", "cosh", "tanh",
        "exp", "expm1", "log", "log2", "log10", "log1p", "sqrt", "fabs",
        "floor", "ceil", "atan2", "hypot", "pow",
    )
}
_MATH_CONSTS = {"pi": math.pi, "e": math.e, "tau": math.tau}

_ALLOWED_NODES = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Constant,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.FloorDiv, ast.Mod, ast.Pow,
    ast.USub, ast.UAdd, ast.Load,
)


def compile_expression(text: str):
    """Compile a one-variable math expression like ``cos(x) / 2 + 0.1``.

    Only arithmetic, the variable ``x``, math functions, and the constants
    pi/e/tau are allowed.
    """
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise ExpressionError(
                f"disallowed syntax in {text!r}: {type(node).__name__}"
            )
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _MATH_FUNCS:
                raise ExpressionError(f"unknown function call in {text!r}")
            if node.keywords:
                raise ExpressionError("keyword arguments are not allowed")
        elif isinstance(node, ast.Name):
            if node.id != "x" and node.id not in _MATH_FUNCS and node.id not in _MATH_CONSTS:
                raise ExpressionError(f"unknown name {node.id!r} in {text!r}")
        elif isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)):
                raise ExpressionError(f"non-numeric constant in {text!r}")
    code = compile(tree, "<expression>", "eval")
    env = {"__builtins__": {}}
    env.update(_MATH_FUNCS)
    env.update(_MATH_CONSTS)

    def func(x: float) -> float:
        return float(eval(code, env, {"x": x}))

    return func


SIN_KERNEL = "sin-kernel"
LINEAR_KERNELS = {
    "separable-xy": lambda x, y: x * y,
    "constant": lambda x, y: 1.0,
}
KERNEL_CHOICES = sorted([SIN_KERNEL, *LINEAR_KERNELS])

G_FUNCS = {
    "linear": lambda x: x,
    "one": lambda x: 1.0,
    "zero": lambda x: 0.0,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _fmt(x) -> str:
    return repr(float(x))


def _write_trace(trace, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "step_distance", "step_ratio"])
        prev = None
        for k, d in enumerate(trace.step_distances, start=1):
            ratio = _fmt(d / prev) if prev is not None and prev > 0 else ""
            writer.writerow([k, _fmt(d), ratio])
            prev = d


def _print_norms(per_norm_values: dict, selected) -> None:
    shown = " ".join(f"{kind}={_fmt(per_norm_values[kind])}" for kind in selected)
    print(f"norms: {shown}")


def _status_exit(status: IterationStatus) -> int:
    return EXIT_OK if status is IterationStatus.CONVERGED else EXIT_REFUSED


def _read_system(args):
    A = io_formats.read_matrix_market(args.matrix).to_csr()
    b = io_formats.read_vector(args.rhs)
    return A, b


def _cmd_certify(args) -> int:
    A = io_formats.read_matrix_market(args.matrix).to_csr()
    cert = sparse.certify(A)
    if args.output == "json":
        doc = io_formats.matrix_certificate_document(A.n_rows, A.n_cols, A.nnz, cert)
        doc.norms = {k: cert.per_norm_values[k] for k in NORM_CHOICES[args.norm]}
        sys.stdout.write(io_formats.certificate_to_json(doc))
    else:
        print(f"matrix: {A.n_rows}x{A.n_cols} ({A.nnz} stored entries)")
        _print_norms(cert.per_norm_values, NORM_CHOICES[args.norm])
        if cert.determinant_diagnostic is not None:
            print(f"determinant diagnostic: {_fmt(cert.determinant_diagnostic)}")
        print(f"verdict: {cert.verdict}")
    return EXIT_OK if cert.is_contractive else EXIT_REFUSED


def _print_vector(label: str, v) -> None:
    print(label)
    for x in v:
        print(_fmt(x))


def _solve_verify(A, b, report=None) -> None:
    try:
        x_oracle = oracle.solve_sparse_system(A, b)
    except (FixpointError, ValueError) as exc:
        print(f"oracle verification unavailable: {exc}")
        return
    _print_vector("oracle solution:", x_oracle)
    print(f"oracle residual: {_fmt(sparse.residual_norm(A, x_oracle, b))}")
    if report is not None:
        dist = float(np.linalg.norm(report.solution - x_oracle))
        print(f"distance to oracle: {_fmt(dist)}")
        bound = report.fixed_point.a_posteriori_bound
        if bound is not None:
            print(f"within a-posteriori bound: {'yes' if dist <= bound else 'no'}")


def _cmd_solve(args) -> int:
    A, b = _read_system(args)
    if args.precondition == sparse.JACOBI:
        A, b = sparse.jacobi_precondition(A, b)
    rule = StoppingRule(tolerance=args.tol, max_iterations=args.max_iter)

    try:
        report = sparse.solve_fixed_point(A, b, rule=rule, force=args.force)
    except NotContractiveError as exc:
        cert = sparse.certify(A)
        if args.output == "json":
            doc = io_formats.matrix_certificate_document(A.n_rows, A.n_cols, A.nnz, cert)
            sys.stdout.write(io_formats.certificate_to_json(doc))
        else:
            _print_norms(cert.per_norm_values, NORM_CHOICES[args.norm])
            print(f"verdict: {cert.verdict}")
            if args.verify:
                _solve_verify(A, b)
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED

    report = dataclasses.replace(report, preconditioner=args.precondition)
    if args.trace:
        _write_trace(report.trace, args.trace)

    result = report.fixed_point
    if args.output == "json":
        doc = io_formats.matrix_certificate_document(
            A.n_rows, A.n_cols, A.nnz, report.certificate,
            solve=io_formats.solve_summary(result, report.residual_norm),
        )
        sys.stdout.write(io_formats.certificate_to_json(doc))
    else:
        cert = report.certificate
        _print_norms(cert.per_norm_values, NORM_CHOICES[args.norm])
        if cert.determinant_diagnostic is not None:
            print(f"determinant diagnostic: {_fmt(cert.determinant_diagnostic)}")
        print(f"verdict: {cert.verdict}")
        print(f"preconditioner: {report.preconditioner}")
        print(f"status: {result.status.value}")
        print(f"iterations: {result.iterations}")
        print(f"last step: {_fmt(result.last_step)}")
        if result.a_priori_bound is not None:
            print(f"a-priori bound: {_fmt(result.a_priori_bound)}")
        if result.a_posteriori_bound is not None:
            print(f"a-posteriori bound: {_fmt(result.a_posteriori_bound)}")
        print(f"residual: {_fmt(report.residual_norm)}")
        _print_vector("solution:", report.solution)
        if args.verify:
            _solve_verify(A, b, report)
    return _status_exit(result.status)


def _fredholm_document(solution, residual, n_nodes, norms) -> io_formats.CertificateDocument:
    contractive = solution.contraction_factor < 1.0 - fr.CONTRACTION_MARGIN
    return io_formats.CertificateDocument(
        problem={"rows": n_nodes, "cols": n_nodes, "nnz": n_nodes * n_nodes},
        norms=norms,
        verdict=sparse.CONTRACTIVE if contractive else sparse.NOT_CONTRACTIVE,
        solve=io_formats.solve_summary(solution.fixed_point, residual),
    )


def _emit_fredholm_table(solution, dest) -> None:
    writer = csv.writer(dest)
    writer.writerow(["node", "f"])
    for x, f in zip(solution.nodes, solution.f_samples):
        writer.writerow([_fmt(x), _fmt(f)])


def _cmd_fredholm(args) -> int:
    rule = StoppingRule(tolerance=args.tol, max_iterations=args.max_iter)
    if args.kernel == SIN_KERNEL:
        if args.a != 0.0 or args.b != 1.0:
            raise _UsageError("the sin-kernel map is defined on [0, 1] only")
        solution = fr.solve_sin_kernel(rule, n_nodes=args.nodes)
        residual = float(
            np.max(np.abs(fr.sin_kernel_map(solution.f_samples) - solution.f_samples))
        )
        norms = {"lipschitz": solution.contraction_factor}
        header = f"kernel: {args.kernel} on [0.0, 1.0], nodes={args.nodes}"
    else:
        kernel = fr.Kernel(LINEAR_KERNELS[args.kernel], args.a, args.b)
        disc = fr.discretize(kernel, G_FUNCS[args.g], args.u, args.nodes)
        solution = fr.solve_fredholm(disc, rule, force=args.force)
        residual = fr.nystrom_residual(disc, solution.f_samples)
        norms = {
            "kernel_l2": solution.kernel_norm,
            "scaled_kernel_l2": solution.contraction_factor,
        }
        header = (
            f"kernel: {args.kernel} on [{_fmt(args.a)}, {_fmt(args.b)}], "
            f"u={_fmt(args.u)}, g={args.g}, nodes={args.nodes}"
        )

    if args.trace:
        _write_trace(solution.trace, args.trace)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            _emit_fredholm_table(solution, fh)

    result = solution.fixed_point
    if args.output == "json":
        doc = _fredholm_document(solution, residual, args.nodes, norms)
        sys.stdout.write(io_formats.certificate_to_json(doc))
    else:
        print(header)
        print(f"contraction factor: {_fmt(solution.contraction_factor)}")
        print(f"status: {result.status.value}")
        print(f"iterations: {result.iterations}")
        print(f"residual: {_fmt(residual)}")
        _emit_fredholm_table(solution, sys.stdout)
    return _status_exit(result.status)


def _cmd_scalar(args) -> int:
    f = compile_expression(args.function)
    problem = scalar.ScalarProblem(f, args.a, args.b)
    solve = scalar.solve_scalar_detailed(
        problem, tol=args.tol, max_iter=args.max_iter,
        samples=args.samples, force=args.force,
    )
    if args.trace:
        _write_trace(solve.trace, args.trace)
    result = solve.result
    residual = abs(f(result.point) - result.point)
    if args.output == "json":
        doc = io_formats.CertificateDocument(
            problem={"rows": 1, "cols": 1, "nnz": 1},
            norms={"lipschitz": solve.lipschitz_estimate},
            verdict=sparse.CONTRACTIVE if solve.lipschitz_estimate < 1.0
            else sparse.NOT_CONTRACTIVE,
            solve=io_formats.solve_summary(result, residual),
        )
        sys.stdout.write(io_formats.certificate_to_json(doc))
    else:
        print(f"function: {args.function} on [{_fmt(args.a)}, {_fmt(args.b)}]")
        print(f"lipschitz estimate: {_fmt(solve.lipschitz_estimate)}")
        print(f"status: {result.status.value}")
        print(f"iterations: {result.iterations}")
        print(f"fixed point: {_fmt(result.point)}")
        print(f"residual: {_fmt(residual)}")
        if result.a_posteriori_bound is not None:
            print(f"a-posteriori bound: {_fmt(result.a_posteriori_bound)}")
    return _status_exit(result.status)


def _add_common(p, with_force=True):
    p.add_argument("--tol", type=float, default=1e-10,
                   help="stopping tolerance (default 1e-10)")
    p.add_argument("--max-iter", type=int, default=100_000,
                   help="iteration budget (default 100000)")
    if with_force:
        p.add_argument("--force", action="store_true",
                       help="iterate even without a contraction certificate")
    p.add_argument("--trace", metavar="PATH",
                   help="write iteration,step_distance,step_ratio CSV")
    p.add_argument("--output", choices=("text", "json"), default="text",
                   help="output format (default text)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="fixpoint",
        description="Certified fixed-point solving with convergence certificates.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("certify",
                       help="contraction certificate for a matrix")
    p.add_argument("matrix", help="Matrix Market file")
    p.add_argument("--norm", choices=sorted(NORM_CHOICES), default="all",
                   help="norms to report (verdict always uses all)")
    p.add_argument("--output", choices=("text", "json"), default="text")
    p.set_defaults(handler=_cmd_certify)

    p = sub.add_parser("solve",
                       help="solve Ax = b by certified fixed-point iteration")
    p.add_argument("--matrix", required=True, help="Matrix Market file")
    p.add_argument("--rhs", required=True, help="right-hand side vector file")
    p.add_argument("--norm", choices=sorted(NORM_CHOICES), default="all")
    p.add_argument("--precondition", choices=(sparse.NO_PRECONDITIONER, sparse.JACOBI),
                   default=sparse.NO_PRECONDITIONER)
    p.add_argument("--verify", action="store_true",
                   help="cross-check against the dense oracle (n <= 1000)")
    _add_common(p)
    p.set_defaults(handler=_cmd_solve)

    p = sub.add_parser("fredholm",
                       help="solve a second-kind integral equation by Picard iteration")
    p.add_argument("--kernel", choices=KERNEL_CHOICES, required=True)
    p.add_argument("--a", type=float, default=0.0, help="interval start (default 0)")
    p.add_argument("--b", type=float, default=1.0, help="interval end (default 1)")
    p.add_argument("--u", type=float, default=1.0, help="kernel scale factor")
    p.add_argument("--nodes", type=int, default=64,
                   help="quadrature node count (default 64)")
    p.add_argument("--g", choices=sorted(G_FUNCS), default="linear",
                   help="inhomogeneous term (default linear)")
    p.add_argument("--csv", metavar="PATH", help="also write the node,f table here")
    _add_common(p)
    p.set_defaults(handler=_cmd_fredholm)

    p = sub.add_parser("scalar",
                       help="fixed point of a scalar self-map on [a, b]")
    p.add_argument("--function", required=True,
                   help="expression in x, e.g. 'cos(x)'")
    p.add_argument("--a", type=float, required=True, help="interval start")
    p.add_argument("--b", type=float, required=True, help="interval end")
    p.add_argument("--samples", type=int, default=scalar.DEFAULT_SAMPLES,
                   help="grid size for the Lipschitz estimate (default 1024)")
    _add_common(p)
    p.set_defaults(handler=_cmd_scalar)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NotContractiveError, NotSelfMapError, ZeroDiagonalError) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except (FixpointError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
