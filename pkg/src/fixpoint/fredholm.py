"""Fredholm integral equations of the second kind,

    f(x) = g(x) + u * integral_a^b M(x, y) f(y) dy,

solved by Nystrom discretization and Picard iteration in the weighted
discrete L2 metric (weights = quadrature weights).  The iteration is
certified by the scaled kernel norm

    factor = |u| * (integral_a^b integral_a^b M(x, y)^2 dy dx)^(1/2),

estimated with the same quadrature rule; the factor dominates the discrete
operator norm, so factor < 1 guarantees contraction.

Also includes the nonlinear averaged-sine self-map on [0, 1],

    (A f)(t) = integral_0^1 sin(f(t) - y) / 2 dy,

whose inner integral has the closed form (cos(f - 1) - cos(f)) / 2 and whose
contraction factor is 1/2 since sin is 1-Lipschitz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import NonFiniteError, NotContractiveError
from .metric import (
    FixedPointMap,
    FixedPointResult,
    IterationTrace,
    StoppingRule,
    banach_iterate,
)

GAUSS_RULE = "gauss"
TRAPEZOID_RULE = "trapezoid"

# Quadrature-estimated factors this close to 1 are treated as not
# contractive: the bound q/(1-q) is useless there and the estimate itself
# carries quadrature error.
CONTRACTION_MARGIN = 1e-9

SIN_KERNEL_FACTOR = 0.5


@dataclass(frozen=True)
class Kernel:
    """A kernel M(x, y) on the square [a, b] x [a, b]."""

    func: Callable[[float, float], float]
    a: float
    b: float

    def __post_init__(self):
        if not (self.a < self.b):
            raise ValueError(f"need a < b, got [{self.a!r}, {self.b!r}]")


@dataclass(frozen=True)
class DiscretizedFredholm:
    """Quadrature nodes/weights with the kernel matrix and g sampled there."""

    nodes: np.ndarray
    weights: np.ndarray
    kernel_matrix: np.ndarray
    g_samples: np.ndarray
    u: float

    def __post_init__(self):
        n = self.nodes.shape[0]
        if self.weights.shape != (n,) or self.g_samples.shape != (n,):
            raise ValueError("nodes, weights, g_samples must share one length")
        if self.kernel_matrix.shape != (n, n):
            raise ValueError("kernel matrix must be n x n")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")

    @property
    def n_nodes(self) -> int:
        return int(self.nodes.shape[0])

    def scaled_kernel_norm(self) -> float:
        """Quadrature estimate of the kernel L2 norm on this node set."""
        sq = np.square(self.kernel_matrix)
        return math.sqrt(float(self.weights @ sq @ self.weights))

    def contraction_factor(self) -> float:
        return abs(self.u) * self.scaled_kernel_norm()


@dataclass(frozen=True)
class FredholmSolution:
    """Solution samples at the quadrature nodes plus the iteration record."""

    nodes: np.ndarray
    f_samples: np.ndarray
    fixed_point: FixedPointResult
    kernel_norm: float
    contraction_factor: float
    trace: IterationTrace


def quadrature_nodes(
    n_nodes: int, a: float, b: float, rule: str = GAUSS_RULE, panels: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [a, b]; weights sum to b - a.

    Gauss-Legendre is composite over ``panels`` equal subintervals with
    ``n_nodes // panels`` points each.  The trapezoid rule (single panel
    only) is the fallback for kernels that are not smooth.
    """
    if n_nodes < 2:
        raise ValueError("need at least 2 quadrature nodes")
    if not (a < b):
        raise ValueError(f"need a < b, got [{a!r}, {b!r}]")
    if rule == TRAPEZOID_RULE:
        if panels != 1:
            raise ValueError("trapezoid rule does not take panels")
        nodes = np.linspace(a, b, n_nodes)
        h = (b - a) / (n_nodes - 1)
        weights = np.full(n_nodes, h)
        weights[0] = weights[-1] = h / 2.0
        return nodes, weights
    if rule != GAUSS_RULE:
        raise ValueError(f"unknown quadrature rule {rule!r}")
    if panels < 1 or n_nodes % panels != 0:
        raise ValueError("n_nodes must be a positive multiple of panels")
    per_panel = n_nodes // panels
    ref_nodes, ref_weights = np.polynomial.legendre.leggauss(per_panel)
    width = (b - a) / panels
    nodes = np.empty(n_nodes)
    weights = np.empty(n_nodes)
    for p in range(panels):
        lo = a + p * width
        mid = lo + width / 2.0
        nodes[p * per_panel:(p + 1) * per_panel] = mid + ref_nodes * (width / 2.0)
        weights[p * per_panel:(p + 1) * per_panel] = ref_weights * (width / 2.0)
    return nodes, weights


def _require_finite(values: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise NonFiniteError(f"{what} evaluated to NaN or infinity")
    return values


def _sample_kernel(kernel: Kernel, nodes: np.ndarray) -> np.ndarray:
    n = nodes.shape[0]
    m = np.empty((n, n))
    for i in range(n):
        xi = float(nodes[i])
        for j in range(n):
            m[i, j] = kernel.func(xi, float(nodes[j]))
    return _require_finite(m, "kernel")


def kernel_l2_norm(
    kernel: Kernel, n_nodes: int, rule: str = GAUSS_RULE, panels: int = 1
) -> float:
    """Quadrature estimate of (integral integral M(x,y)^2 dy dx)^(1/2)."""
    nodes, weights = quadrature_nodes(n_nodes, kernel.a, kernel.b, rule, panels)
    sq = np.square(_sample_kernel(kernel, nodes))
    return math.sqrt(float(weights @ sq @ weights))


def discretize(
    kernel: Kernel,
    g: Callable[[float], float],
    u: float,
    n_nodes: int,
    rule: str = GAUSS_RULE,
    panels: int = 1,
) -> DiscretizedFredholm:
    """Sample the kernel and g on a quadrature grid."""
    nodes, weights = quadrature_nodes(n_nodes, kernel.a, kernel.b, rule, panels)
    matrix = _sample_kernel(kernel, nodes)
    g_samples = _require_finite(
        np.array([g(float(x)) for x in nodes], dtype=np.float64), "g"
    )
    return DiscretizedFredholm(nodes=nodes, weights=weights, kernel_matrix=matrix,
                               g_samples=g_samples, u=float(u))


def weighted_l2_distance(weights: np.ndarray) -> Callable[[np.ndarray, np.ndarray], float]:
    sqrt_w = np.sqrt(weights)

    def distance(f1: np.ndarray, f2: np.ndarray) -> float:
        return float(np.linalg.norm(sqrt_w * (f1 - f2)))

    return distance


def picard_map(disc: DiscretizedFredholm) -> Callable[[np.ndarray], np.ndarray]:
    """The discrete map f -> g + u * (M . w) f whose fixed point solves the
    Nystrom system."""
    scaled = disc.u * disc.kernel_matrix * disc.weights[np.newaxis, :]
    g = disc.g_samples

    def apply(f: np.ndarray) -> np.ndarray:
        return g + scaled @ f

    return apply


def nystrom_residual(disc: DiscretizedFredholm, f_samples: np.ndarray) -> float:
    """Weighted-L2 discrepancy between f and the Picard map applied to f."""
    return weighted_l2_distance(disc.weights)(picard_map(disc)(f_samples), f_samples)


def nystrom_eval(
    kernel: Kernel,
    g: Callable[[float], float],
    disc: DiscretizedFredholm,
    f_samples: np.ndarray,
    x,
) -> np.ndarray:
    """Natural Nystrom extension of a solved sample vector to new points."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.empty(x.shape[0])
    wf = disc.weights * f_samples
    for i, xi in enumerate(x):
        row = np.array([kernel.func(float(xi), float(y)) for y in disc.nodes])
        out[i] = g(float(xi)) + disc.u * float(row @ wf)
    return _require_finite(out, "extension")


def solve_fredholm(
    disc: DiscretizedFredholm,
    rule: StoppingRule | None = None,
    force: bool = False,
    f0: np.ndarray | None = None,
) -> FredholmSolution:
    """Picard-iterate the discretized equation to its fixed point.

    Refuses when |u| times the kernel norm estimate is not safely below 1,
    unless ``force`` is set.
    """
    kernel_norm = disc.scaled_kernel_norm()
    factor = disc.contraction_factor()
    if factor >= 1.0 - CONTRACTION_MARGIN and not force:
        raise NotContractiveError(
            f"|u| * kernel norm = {factor:.9g} is not safely below 1; "
            "pass force=True to iterate anyway"
        )
    rule = rule if rule is not None else StoppingRule()
    if rule.q_for_bounds is None and factor < 1.0:
        rule = replace(rule, q_for_bounds=factor)

    f0 = disc.g_samples.copy() if f0 is None else np.asarray(f0, dtype=np.float64)
    fp_map = FixedPointMap(apply=picard_map(disc),
                           distance=weighted_l2_distance(disc.weights))
    result, trace = banach_iterate(fp_map, f0, rule)
    return FredholmSolution(
        nodes=disc.nodes,
        f_samples=result.point,
        fixed_point=result,
        kernel_norm=kernel_norm,
        contraction_factor=factor,
        trace=trace,
    )


def sin_kernel_map(f_samples: np.ndarray) -> np.ndarray:
    """Averaged-sine self-map, integrated in closed form per node:

        integral_0^1 sin(f - y) / 2 dy = (cos(f - 1) - cos(f)) / 2.
    """
    f = _require_finite(np.asarray(f_samples, dtype=np.float64), "f")
    return (np.cos(f - 1.0) - np.cos(f)) / 2.0


def solve_sin_kernel(
    rule: StoppingRule | None = None,
    n_nodes: int = 16,
    start: float | np.ndarray = 0.0,
) -> FredholmSolution:
    """Iterate the averaged-sine map to its unique fixed point.

    The map acts pointwise, so the solution is the constant c* solving
    c = (cos(c - 1) - cos(c)) / 2.  Bounds use the analytic factor 1/2;
    ``kernel_norm`` reports that Lipschitz bound, not an L2 estimate.
    """
    nodes, weights = quadrature_nodes(n_nodes, 0.0, 1.0)
    f0 = np.full(n_nodes, float(start)) if np.isscalar(start) else \
        np.asarray(start, dtype=np.float64)
    rule = rule if rule is not None else StoppingRule()
    if rule.q_for_bounds is None:
        rule = replace(rule, q_for_bounds=SIN_KERNEL_FACTOR)
    fp_map = FixedPointMap(apply=sin_kernel_map,
                           distance=weighted_l2_distance(weights))
    result, trace = banach_iterate(fp_map, f0, rule)
    return FredholmSolution(
        nodes=nodes,
        f_samples=result.point,
        fixed_point=result,
        kernel_norm=SIN_KERNEL_FACTOR,
        contraction_factor=SIN_KERNEL_FACTOR,
        trace=trace,
    )
