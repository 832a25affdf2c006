"""Fixed points of black-box self-maps f: [a, b] -> [a, b].

The Lipschitz constant is estimated by dense sampling of difference
quotients on a uniform grid; for affine maps the estimate is exact, for
general maps it is a heuristic lower bound (the grid can straddle the
steepest point).  Iteration starts at the interval midpoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NotContractiveError, NotSelfMapError
from .metric import (
    FixedPointMap,
    FixedPointResult,
    IterationTrace,
    StoppingRule,
    banach_iterate,
)

DEFAULT_SAMPLES = 1024
SELF_MAP_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ScalarProblem:
    """A scalar map expected to send [a, b] into itself."""

    f: Callable[[float], float]
    a: float
    b: float

    def __post_init__(self):
        if not (self.a < self.b):
            raise ValueError(f"need a < b, got [{self.a!r}, {self.b!r}]")


def estimate_lipschitz(problem: ScalarProblem, samples: int = DEFAULT_SAMPLES) -> float:
    """Largest difference quotient |f(x_{i+1}) - f(x_i)| / (x_{i+1} - x_i)
    over a uniform grid.

    Also checks the self-map property at every sample and raises
    :class:`NotSelfMapError` on the first violation beyond 1e-12.
    """
    if samples < 2:
        raise ValueError("need at least 2 samples")
    xs = np.linspace(problem.a, problem.b, samples)
    fs = np.array([problem.f(float(x)) for x in xs], dtype=np.float64)
    if not np.all(np.isfinite(fs)):
        raise ValueError("f evaluated to NaN or infinity on the grid")
    lo = problem.a - SELF_MAP_TOLERANCE
    hi = problem.b + SELF_MAP_TOLERANCE
    bad = np.nonzero((fs < lo) | (fs > hi))[0]
    if bad.size:
        i = int(bad[0])
        raise NotSelfMapError(
            f"f({xs[i]!r}) = {fs[i]!r} lies outside [{problem.a!r}, {problem.b!r}]"
        )
    return float(np.max(np.abs(np.diff(fs)) / np.diff(xs)))


@dataclass(frozen=True)
class ScalarSolve:
    """Detailed scalar-solve output for callers that need the trace."""

    result: FixedPointResult
    trace: IterationTrace
    lipschitz_estimate: float


def solve_scalar_detailed(
    problem: ScalarProblem,
    tol: float = 1e-10,
    max_iter: int = 100_000,
    samples: int = DEFAULT_SAMPLES,
    force: bool = False,
) -> ScalarSolve:
    """Estimate the Lipschitz constant, then iterate from the midpoint.

    Refuses when the estimate is >= 1 unless ``force`` is set; forced runs
    fall back to raw-step stopping with divergence detection.
    """
    k_hat = estimate_lipschitz(problem, samples)
    if k_hat >= 1.0 and not force:
        raise NotContractiveError(
            f"estimated Lipschitz constant {k_hat:.6g} is not below 1; "
            "pass force=True to iterate anyway"
        )
    rule = StoppingRule(
        tolerance=tol,
        max_iterations=max_iter,
        q_for_bounds=k_hat if k_hat < 1.0 else None,
    )
    fp_map = FixedPointMap(
        apply=lambda x: float(problem.f(x)),
        distance=lambda x, y: abs(x - y),
    )
    x0 = (problem.a + problem.b) / 2.0
    result, trace = banach_iterate(fp_map, x0, rule)
    return ScalarSolve(result=result, trace=trace, lipschitz_estimate=k_hat)


def solve_scalar_fixed_point(
    problem: ScalarProblem,
    tol: float = 1e-10,
    max_iter: int = 100_000,
    samples: int = DEFAULT_SAMPLES,
    force: bool = False,
) -> FixedPointResult:
    """Fixed point of the map with |f(x*) - x*| <= tol on convergence."""
    return solve_scalar_detailed(problem, tol, max_iter, samples, force).result
