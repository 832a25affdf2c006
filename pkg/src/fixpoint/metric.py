"""Banach fixed-point iteration over an abstract metric-space contract.

A :class:`FixedPointMap` bundles a self-map ``T`` with a distance function
``d``.  :func:`banach_iterate` produces the orbit ``x0, T(x0), T(T(x0)), ...``
and stops either on the raw step size ``d(x_n, x_{n-1})`` or, when a
contraction factor ``q`` is supplied, on the a-posteriori criterion
``q/(1-q) * d(x_n, x_{n-1}) <= tol`` which guarantees ``d(x_n, x*) <= tol``.

The error bounds follow the standard geometric-series estimates for a
contraction with factor ``q < 1``:

    a-priori:      d(x_n, x*) <= q**n / (1 - q) * d(x_1, x_0)
    a-posteriori:  d(x_n, x*) <= q / (1 - q) * d(x_n, x_{n-1})
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Callable

from .errors import InsufficientDataError

DEFAULT_ITERATE_CAP = 10_000


class IterationStatus(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    DIVERGENCE = "diverged"


@dataclass(frozen=True)
class FixedPointMap:
    """A self-map together with the metric it contracts under.

    ``apply`` maps a point to the next point; ``distance`` must be a metric
    on the orbit (non-negative, zero on the diagonal, symmetric, triangle
    inequality).  Points may be floats, numpy arrays, or anything else the
    two callables agree on.
    """

    apply: Callable[[Any], Any]
    distance: Callable[[Any, Any], float]


@dataclass
class IterationTrace:
    """The orbit of one iteration run.

    ``step_distances[k]`` is ``d(x_{k+1}, x_k)``.  Full iterates are stored
    only up to ``iterate_cap`` points; past the cap only distances keep
    accumulating, so ``iterates`` may be shorter than the run.
    """

    iterates: list = field(default_factory=list)
    step_distances: list = field(default_factory=list)
    iterate_cap: int = DEFAULT_ITERATE_CAP

    @property
    def n_steps(self) -> int:
        return len(self.step_distances)

    @property
    def iterates_complete(self) -> bool:
        return len(self.iterates) == len(self.step_distances) + 1

    def record_start(self, x0) -> None:
        if self.iterates or self.step_distances:
            raise ValueError("trace already started")
        self.iterates.append(x0)

    def record_step(self, x, step_distance: float) -> None:
        if step_distance < 0 or math.isnan(step_distance):
            raise ValueError(f"invalid step distance {step_distance!r}")
        if len(self.iterates) < self.iterate_cap:
            self.iterates.append(x)
        self.step_distances.append(float(step_distance))

    def step_ratios(self) -> list:
        """Consecutive ratios d(x_{k+1},x_k) / d(x_k,x_{k-1}), skipping zero
        denominators."""
        out = []
        for prev, cur in zip(self.step_distances, self.step_distances[1:]):
            if prev > 0.0:
                out.append(cur / prev)
        return out


@dataclass(frozen=True)
class StoppingRule:
    """When to stop iterating.

    ``tolerance`` is measured in metric units.  If ``q_for_bounds`` is given
    (a certified contraction factor in [0, 1)) the a-posteriori criterion is
    used and the produced result carries error bounds; otherwise stopping is
    on the raw step size.  ``divergence_window`` consecutive expanding steps
    (ratio > 1) abort the run.
    """

    tolerance: float = 1e-10
    max_iterations: int = 100_000
    q_for_bounds: float | None = None
    divergence_window: int = 5

    def __post_init__(self):
        if not (self.tolerance > 0):
            raise ValueError(f"tolerance must be positive, got {self.tolerance!r}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be a positive count")
        if self.divergence_window < 1:
            raise ValueError("divergence_window must be a positive count")
        q = self.q_for_bounds
        if q is not None and not (0.0 <= q < 1.0):
            raise ValueError(f"q_for_bounds must lie in [0, 1), got {q!r}")


@dataclass(frozen=True)
class FixedPointResult:
    """Outcome of an iteration run.

    ``iterations`` counts applications of the map.  Bounds are present only
    when a contraction factor was supplied to the stopping rule.
    """

    point: Any
    iterations: int
    last_step: float
    status: IterationStatus
    a_priori_bound: float | None = None
    a_posteriori_bound: float | None = None

    @property
    def converged(self) -> bool:
        return self.status is IterationStatus.CONVERGED


def a_priori_error_bound(q: float, n: int, d1: float) -> float:
    """Bound on d(x_n, x*) computable before iterating: q**n * d1 / (1 - q).

    ``d1`` is the first step distance d(x_1, x_0).
    """
    if not (0.0 <= q < 1.0):
        raise ValueError(f"q must lie in [0, 1), got {q!r}")
    if n < 0:
        raise ValueError("n must be a non-negative count")
    if d1 < 0:
        raise ValueError(f"d1 must be non-negative, got {d1!r}")
    return q**n * d1 / (1.0 - q)


def a_posteriori_error_bound(q: float, last_step: float) -> float:
    """Bound on d(x_n, x*) from the last step: q * last_step / (1 - q)."""
    if not (0.0 <= q < 1.0):
        raise ValueError(f"q must lie in [0, 1), got {q!r}")
    if last_step < 0:
        raise ValueError(f"last_step must be non-negative, got {last_step!r}")
    return q * last_step / (1.0 - q)


def a_priori_iteration_count(q: float, d1: float, tol: float) -> int:
    """Smallest n >= 0 with a_priori_error_bound(q, n, d1) <= tol.

    Exact argmin with respect to the float evaluation of the bound: the
    closed-form estimate from logarithms is corrected by direct checks.
    """
    if not (0.0 < q < 1.0):
        raise ValueError(f"q must lie in (0, 1), got {q!r}")
    if not (d1 > 0):
        raise ValueError(f"d1 must be positive, got {d1!r}")
    if not (tol > 0):
        raise ValueError(f"tol must be positive, got {tol!r}")
    if d1 / (1.0 - q) <= tol:
        return 0
    n = max(0, math.ceil(math.log(tol * (1.0 - q) / d1) / math.log(q)))
    while n > 0 and a_priori_error_bound(q, n - 1, d1) <= tol:
        n -= 1
    while a_priori_error_bound(q, n, d1) > tol:
        n += 1
    return n


def banach_iterate(
    fp_map: FixedPointMap,
    x0,
    rule: StoppingRule,
    *,
    iterate_cap: int = DEFAULT_ITERATE_CAP,
) -> tuple[FixedPointResult, IterationTrace]:
    """Iterate ``x_{k+1} = T(x_k)`` until the stopping rule fires.

    Returns the result and the full trace.  Divergence (``divergence_window``
    consecutive step ratios above 1) and an exhausted iteration budget are
    reported through ``result.status``, not raised.
    """
    q = rule.q_for_bounds
    trace = IterationTrace(iterate_cap=iterate_cap)
    trace.record_start(x0)

    x = x0
    d = 0.0
    d1 = None
    consecutive_expanding = 0
    prev_step = None
    status = IterationStatus.MAX_ITERATIONS
    iterations = 0

    for iterations in range(1, rule.max_iterations + 1):
        x_next = fp_map.apply(x)
        d = float(fp_map.distance(x_next, x))
        trace.record_step(x_next, d)
        x = x_next
        if d1 is None:
            d1 = d

        criterion = (q / (1.0 - q)) * d if q is not None else d
        if criterion <= rule.tolerance:
            status = IterationStatus.CONVERGED
            break

        if prev_step is not None and d > prev_step:
            consecutive_expanding += 1
            if consecutive_expanding >= rule.divergence_window:
                status = IterationStatus.DIVERGENCE
                break
        else:
            consecutive_expanding = 0
        prev_step = d

    a_priori = a_posteriori = None
    if q is not None:
        a_priori = a_priori_error_bound(q, iterations, d1)
        a_posteriori = a_posteriori_error_bound(q, d)

    result = FixedPointResult(
        point=x,
        iterations=iterations,
        last_step=d,
        status=status,
        a_priori_bound=a_priori,
        a_posteriori_bound=a_posteriori,
    )
    return result, trace


def estimate_contraction_factor(trace: IterationTrace) -> float:
    """Empirical contraction factor: the largest observed step ratio.

    Ratios with a zero denominator are skipped, so a run that lands exactly
    on its fixed point estimates 0 from the final contracting step.  Raises
    :class:`InsufficientDataError` when no ratio is computable.
    """
    ratios = trace.step_ratios()
    if not ratios:
        raise InsufficientDataError(
            "need at least 2 step distances with a nonzero denominator"
        )
    return max(ratios)
