"""Local-optimality meter, tightness instances, and closed-form bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import TIE_RTOL, PointSet
from .solvers import (
    DEFAULT_BUDGET,
    Solution,
    brute_force_maxvol,
    candidate_rows,
    greedy,
    swap_log_ratios,
    swap_volume_in,
)


@dataclass(frozen=True)
class OptimalityReport:
    """Largest single-swap volume ratio of a solution, floored at 1.

    ``argmax_swap`` is ``(out_position, in_id)`` for the best swap, or None
    when there is no candidate. For a zero-volume solution ``rank_deficient``
    is set and the ratio is 1 if every swap also has zero volume; otherwise
    ``incomparable`` is set and the ratio is ``inf``.
    """

    k: int
    measured_ratio: float
    theoretical_bound: float
    argmax_swap: Optional[tuple] = None
    rank_deficient: bool = False
    incomparable: bool = False
    max_log_ratio: float = -math.inf

    @property
    def within_bound(self) -> bool:
        return self.measured_ratio <= self.theoretical_bound


def measure_local_optimality(points: PointSet, sol: Solution) -> OptimalityReport:
    if any(i < 0 or i >= points.n for i in sol.indices) or len(set(sol.indices)) != sol.k:
        raise ValueError("solution does not index distinct rows of this point set")
    if sol.basis.size and not np.array_equal(sol.basis.original, points.points[list(sol.indices[: sol.basis.size])]):
        raise ValueError("solution vectors do not match the point set")
    k = sol.k
    bound = 1.0 + math.sqrt(k)

    if sol.rank_deficient:
        for row in candidate_rows(points, sol):
            for pos in range(k):
                gain = swap_volume_in(points, sol, pos, int(row))
                if gain.kind == "from_zero":
                    return OptimalityReport(
                        k, math.inf, bound, (pos, gain.in_id), True, True, math.inf
                    )
        return OptimalityReport(k, 1.0, bound, None, True)

    rows, log_ratio, _ = swap_log_ratios(points, sol)
    if rows.size == 0:
        return OptimalityReport(k, 1.0, bound)
    flat = int(np.argmax(log_ratio))
    pos, col = divmod(flat, rows.size)
    best = float(log_ratio[pos, col])
    # swaps that only tie within rounding do not count as improvements
    ratio = 1.0 if best <= TIE_RTOL else math.exp(best)
    return OptimalityReport(k, ratio, bound, (pos, int(points.ids[rows[col]])), max_log_ratio=best)


def position_log_ratios(points: PointSet, sol: Solution) -> np.ndarray:
    """Per selected position, the largest log ratio over all swaps out of it."""
    rows, log_ratio, _ = swap_log_ratios(points, sol)
    if rows.size == 0:
        return np.full(sol.k, -math.inf)
    return log_ratio.max(axis=1)


def tightness_instance(k: int) -> PointSet:
    """``k + 1`` points in ``R^k``: the all-ones vector, then ``sqrt(k) e_1 .. sqrt(k) e_k``.

    Greedy on this set is exactly ``sqrt(k)`` away from its best single swap.
    """
    if k < 2:
        raise ValueError(f"the tightness instance needs k >= 2, got {k}")
    pts = np.vstack([np.ones(k), math.sqrt(k) * np.eye(k)])
    return PointSet(pts)


def greedy_offline_bound(k: int) -> float:
    """``sum_{i=2..k} log(1 + sqrt(i))``, the log approximation factor of greedy."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    return math.fsum(math.log1p(math.sqrt(i)) for i in range(2, k + 1))


def composition_bound(k: int, epsilon: float) -> float:
    """``2k log(2k(1 + epsilon))``: log of the determinant composition factor."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon}")
    return 2 * k * math.log(2 * k * (1 + epsilon))


@dataclass(frozen=True)
class OfflineApproxReport:
    k: int
    log_maxvol: float
    log_greedy: float
    gap: float
    bound: float
    factorial_bound: float

    @property
    def within_bound(self) -> bool:
        return self.gap <= self.bound + 1e-9

    @property
    def within_factorial_bound(self) -> bool:
        return self.gap <= self.factorial_bound + 1e-9


def verify_offline_approximation(
    points: PointSet, k: int, budget: int = DEFAULT_BUDGET
) -> OfflineApproxReport:
    """Compare greedy against the brute-force optimum.

    Zero-volume optima give a gap of 0 (greedy cannot do worse than zero).
    """
    best = brute_force_maxvol(points, k, budget)
    sol = greedy(points, k)
    if best.log_vol.is_zero:
        gap, lm, lg = 0.0, -math.inf, sol.log_vol.as_float()
    else:
        lm, lg = best.log_vol.value, sol.log_vol.as_float()
        gap = lm - lg
    return OfflineApproxReport(k, lm, lg, gap, greedy_offline_bound(k), math.lgamma(k + 1))
