"""Composable coresets: split, map each part on its own, take the union, check the loss."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .diagnostics import composition_bound
from .geometry import DimensionMismatchError, PointSet
from .solvers import DEFAULT_BUDGET, brute_force_maxvol, greedy, local_search


@dataclass(frozen=True)
class Mapper:
    """Which coreset function to apply to each part."""

    kind: str
    epsilon: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("greedy", "local_search", "identity"):
            raise ValueError(f"unknown mapper {self.kind!r}")
        if self.kind == "local_search" and not (self.epsilon and self.epsilon > 0):
            raise ValueError("the local_search mapper needs epsilon > 0")

    @classmethod
    def parse(cls, text: "str | Mapper") -> "Mapper":
        """Accepts ``greedy``, ``identity`` and ``local_search(0.1)``."""
        if isinstance(text, Mapper):
            return text
        m = re.fullmatch(r"\s*local[_-]search\(\s*([^)]+?)\s*\)\s*", text)
        if m:
            return cls("local_search", float(m.group(1)))
        return cls(text.strip())

    def __str__(self) -> str:
        return f"local_search({self.epsilon:g})" if self.kind == "local_search" else self.kind

    def log_alpha_bound(self, k: int) -> float:
        """Log of the guaranteed determinant composition factor for this mapper."""
        if self.kind == "identity":
            return 0.0
        eps = math.sqrt(k) if self.kind == "greedy" else self.epsilon
        return composition_bound(k, eps)


def partition_dataset(points: PointSet, m: int, part_size: int, seed: int) -> list:
    """``m`` parts of ``part_size`` points, each drawn without replacement.

    Parts are drawn independently of one another, so a point may appear in
    several parts. Ids are preserved.
    """
    if m < 1 or part_size < 1:
        raise ValueError(f"need m >= 1 and part_size >= 1, got m={m}, part_size={part_size}")
    if part_size > points.n:
        raise ValueError(f"part_size={part_size} exceeds the number of points n={points.n}")
    rng = np.random.default_rng(seed)
    return [points.subset(rng.choice(points.n, size=part_size, replace=False)) for _ in range(m)]


def map_part(part: PointSet, k: int, mapper: "Mapper | str") -> PointSet:
    """Coreset of a single part, as a point set with the part's ids.

    Parts with at most ``k`` points are returned whole.
    """
    mapper = Mapper.parse(mapper)
    if mapper.kind == "identity" or part.n <= k:
        return part
    if mapper.kind == "greedy":
        sol = greedy(part, k)
    else:
        sol, _ = local_search(part, k, mapper.epsilon)
    return part.subset(sol.indices)


def compose(images: Sequence[PointSet]) -> PointSet:
    """Multiset union of coreset images with fresh ids ``0..N-1``.

    ``sources[j]`` is ``(part index, original id)`` for row ``j``.
    """
    if not images:
        raise ValueError("compose needs at least one image")
    dims = {img.dim for img in images}
    if len(dims) != 1:
        raise DimensionMismatchError(f"images have mixed dimensions {sorted(dims)}")
    sources = tuple((p, int(i)) for p, img in enumerate(images) for i in img.ids)
    return PointSet(np.vstack([img.points for img in images]), None, sources)


@dataclass(frozen=True, eq=False)
class CoresetFamily:
    parts: tuple
    images: tuple
    mapper: Mapper

    @classmethod
    def build(cls, parts: Sequence[PointSet], k: int, mapper: "Mapper | str") -> "CoresetFamily":
        mapper = Mapper.parse(mapper)
        return cls(tuple(parts), tuple(map_part(p, k, mapper) for p in parts), mapper)

    @property
    def m(self) -> int:
        return len(self.parts)

    def union(self) -> PointSet:
        return compose(self.parts)

    def composed(self) -> PointSet:
        return compose(self.images)


@dataclass(frozen=True)
class CompositionReport:
    k: int
    log_maxdet_union: float
    log_maxdet_coresets: float
    log_alpha_observed: float
    log_alpha_bound: float

    @property
    def within_bound(self) -> bool:
        return self.log_alpha_observed <= self.log_alpha_bound


def verify_composition(
    family: CoresetFamily, k: int, budget: int = DEFAULT_BUDGET
) -> CompositionReport:
    """Brute-force both optima and compare the observed loss with the mapper's bound.

    Log-determinants are twice the log-volumes. A zero optimum on the union
    makes the loss 0; a zero optimum only on the coresets makes it ``inf``.
    """
    union_best = brute_force_maxvol(family.union(), k, budget).log_vol
    core_best = brute_force_maxvol(family.composed(), k, budget).log_vol
    lu, lc = 2 * union_best.as_float(), 2 * core_best.as_float()
    if union_best.is_zero:
        alpha = 0.0
    elif core_best.is_zero:
        alpha = math.inf
    else:
        # brute-force tie tolerance can leave a difference of order -1e-12
        alpha = max(0.0, lu - lc)
    return CompositionReport(k, lu, lc, alpha, family.mapper.log_alpha_bound(k))
