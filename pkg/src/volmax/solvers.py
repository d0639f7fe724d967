"""Greedy, local search, brute force, and swap-volume evaluation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _backend
from .geometry import (
    RANK_TOL,
    TIE_RTOL,
    LogVolume,
    OrthoBasis,
    PointSet,
    RankDeficientError,
    _as_vector,
    extend_basis,
    log_volume,
)

#: Largest number of subsets brute force will enumerate by default.
DEFAULT_BUDGET = 10**7

#: Two subsets whose log-volumes differ by at most this much are tied in
#: brute force; the lexicographically smaller index list wins.
TIE_ATOL = 1e-12


class EnumerationBudgetError(RuntimeError):
    """Brute force would enumerate more subsets than allowed."""


@dataclass(frozen=True, eq=False)
class Solution:
    """``k`` selected rows of a point set, in selection order.

    ``basis`` spans the selected vectors; for a rank-deficient solution it only
    covers the independent prefix and ``log_vol`` is zero.
    """

    indices: tuple
    basis: OrthoBasis
    log_vol: LogVolume
    rank_deficient: bool = False

    @classmethod
    def from_indices(cls, points: PointSet, indices: Sequence[int]) -> "Solution":
        indices = tuple(int(i) for i in indices)
        if len(set(indices)) != len(indices):
            raise ValueError(f"solution indices must be distinct, got {indices}")
        if any(i < 0 or i >= points.n for i in indices):
            raise IndexError(f"solution indices {indices} out of range for {points.n} points")
        basis = OrthoBasis.empty(points.dim)
        for i in indices:
            try:
                basis = extend_basis(basis, points.points[i])
            except RankDeficientError:
                return cls(indices, basis, LogVolume.zero(), True)
        return cls(indices, basis, basis.log_volume(), False)

    @property
    def k(self) -> int:
        return len(self.indices)

    def ids(self, points: PointSet) -> list:
        """Point ids of the selection (rows map through ``points.ids``)."""
        return [int(points.ids[i]) for i in self.indices]

    def vectors(self, points: PointSet) -> np.ndarray:
        return points.points[list(self.indices)]


@dataclass(frozen=True)
class SwapGain:
    """Effect of replacing the vector at ``out_position`` with another one.

    ``kind`` is ``"finite"`` for an ordinary ratio, ``"to_zero"`` when the
    swapped set is degenerate (``log_ratio = -inf``), ``"from_zero"`` when
    only the current set is degenerate (``+inf``) and ``"zero_zero"`` when
    both are (``nan``).
    """

    out_position: int
    in_id: Optional[int]
    log_ratio: float
    kind: str = "finite"

    @property
    def ratio(self) -> float:
        return math.exp(self.log_ratio) if self.kind != "zero_zero" else math.nan


def _check_k(points: PointSet, k: int) -> None:
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
        raise TypeError(f"k must be an integer, got {k!r}")
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if k > points.n:
        raise ValueError(f"k={k} exceeds the number of points n={points.n}")


def greedy(points: PointSet, k: int) -> Solution:
    """Repeatedly add the point with the largest residual against the selection.

    Ties (within a relative ``TIE_RTOL``) go to the lowest row index. If the
    points span fewer than ``k`` dimensions, the missing slots are filled with
    the lowest-index unselected rows and the solution is flagged.
    """
    _check_k(points, k)
    order, _ = _backend.greedy_select(points.points, int(k), RANK_TOL, TIE_RTOL)
    return Solution.from_indices(points, order)


def candidate_rows(points: PointSet, sol: Solution) -> np.ndarray:
    """Rows of ``points`` not in ``sol``, ascending."""
    mask = np.ones(points.n, dtype=bool)
    mask[list(sol.indices)] = False
    return np.flatnonzero(mask)


def swap_log_ratios(points: PointSet, sol: Solution):
    """All single-swap log volume ratios for a full-rank solution.

    Returns ``(rows, log_ratio, is_zero)`` where ``log_ratio[i, j]`` is
    ``log vol(sol - v_i + p_rows[j]) - log vol(sol)``.
    """
    if sol.rank_deficient:
        raise ValueError("swap ratios are undefined for a zero-volume solution")
    rows = candidate_rows(points, sol)
    if rows.size == 0:
        return rows, np.zeros((sol.k, 0)), np.zeros((sol.k, 0), dtype=bool)
    log_ratio, is_zero = _backend.swap_log_ratios(
        sol.basis.units, sol.basis.triangular(), points.points[rows], RANK_TOL
    )
    return rows, log_ratio, is_zero


def swap_volume(
    sol: Solution,
    out_position: int,
    w,
    mode: str = "incremental",
    in_id: Optional[int] = None,
) -> SwapGain:
    """Volume change from swapping ``w`` in at ``out_position``.

    ``mode="recompute"`` orthogonalizes the swapped set from scratch;
    ``mode="incremental"`` reuses the solution's factorization through a
    rank-one determinant update.
    """
    k = sol.k
    if not 0 <= out_position < k:
        raise IndexError(f"out_position {out_position} is not in 0..{k - 1}")
    if mode not in ("incremental", "recompute"):
        raise ValueError(f"mode must be 'incremental' or 'recompute', not {mode!r}")
    dim = sol.basis.dim
    w = _as_vector(w, dim)

    if sol.rank_deficient:
        raise ValueError("solution has zero volume and no full basis; use swap_volume_in")
    if mode == "recompute":
        swapped = np.array(sol.basis.original)
        swapped[out_position] = w
        return _gain(out_position, in_id, sol.log_vol, log_volume(swapped))

    log_ratio, is_zero = _backend.swap_log_ratios(
        sol.basis.units, sol.basis.triangular(), w[None, :], RANK_TOL
    )
    if is_zero[out_position, 0]:
        return SwapGain(out_position, in_id, -math.inf, "to_zero")
    return SwapGain(out_position, in_id, float(log_ratio[out_position, 0]))


def swap_volume_in(
    points: PointSet,
    sol: Solution,
    out_position: int,
    in_row: int,
    mode: str = "incremental",
) -> SwapGain:
    """:func:`swap_volume` for a candidate given by its row in ``points``.

    Unlike :func:`swap_volume` this also handles zero-volume solutions, since
    the selected vectors are read from ``points``.
    """
    if in_row in sol.indices:
        raise ValueError(f"row {in_row} is already selected")
    in_id = int(points.ids[in_row])
    if not sol.rank_deficient:
        return swap_volume(sol, out_position, points.points[in_row], mode, in_id)
    if not 0 <= out_position < sol.k:
        raise IndexError(f"out_position {out_position} is not in 0..{sol.k - 1}")
    rows = list(sol.indices)
    rows[out_position] = in_row
    return _gain(out_position, in_id, sol.log_vol, log_volume(points.points[rows]))


def _gain(out_position, in_id, old: LogVolume, new: LogVolume) -> SwapGain:
    if old.is_zero and new.is_zero:
        return SwapGain(out_position, in_id, math.nan, "zero_zero")
    if old.is_zero:
        return SwapGain(out_position, in_id, math.inf, "from_zero")
    if new.is_zero:
        return SwapGain(out_position, in_id, -math.inf, "to_zero")
    return SwapGain(out_position, in_id, new.value - old.value)


def local_search(points: PointSet, k: int, epsilon: float) -> tuple[Solution, int]:
    """Greedy followed by best-improvement swaps of factor at least ``1 + epsilon``.

    Each round applies the single swap with the largest volume ratio among
    those reaching ``1 + epsilon`` (ties: lowest position, then lowest row),
    until none is left. Returns the solution and the number of swaps made.
    """
    _check_k(points, k)
    if not epsilon > 0 or not math.isfinite(epsilon):
        raise ValueError(f"epsilon must be a positive finite number, got {epsilon!r}")
    sol = greedy(points, k)
    if sol.rank_deficient:
        # rank(P) < k: every k-subset has volume zero, nothing can improve
        return sol, 0
    threshold = math.log1p(epsilon)
    # each swap gains >= log(1+eps) and greedy is within k! of optimal
    cap = int(math.ceil(k * math.log(max(k, 2)) / threshold)) + 2 * k + 10
    swaps = 0
    while True:
        rows, log_ratio, _ = swap_log_ratios(points, sol)
        if rows.size == 0:
            break
        flat = int(np.argmax(log_ratio))
        i, j = divmod(flat, rows.size)
        if not log_ratio[i, j] >= threshold:
            break
        new_indices = list(sol.indices)
        new_indices[i] = int(rows[j])
        sol = Solution.from_indices(points, new_indices)
        swaps += 1
        if swaps > cap:
            raise RuntimeError(f"local search exceeded {cap} swaps; the swap gains are not consistent")
    return sol, swaps


def brute_force_maxvol(points: PointSet, k: int, budget: int = DEFAULT_BUDGET) -> Solution:
    """Maximum-volume ``k``-subset by exhaustive enumeration.

    Ties go to the lexicographically smallest row list; if every subset is
    degenerate the result is ``[0, ..., k-1]`` flagged rank-deficient.
    """
    _check_k(points, k)
    count = math.comb(points.n, k)
    if count > budget:
        raise EnumerationBudgetError(
            f"C({points.n}, {k}) = {count} subsets exceeds the enumeration budget {budget}"
        )
    rows, _ = _backend.brute_force_search(points.points, int(k), RANK_TOL, TIE_ATOL)
    return Solution.from_indices(points, rows)
