"""Local-optimality experiment grids (greedy measured over streams of point sets)."""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

from .coreset import partition_dataset
from .data import (
    ExperimentConfig,
    ReportRow,
    derive_seed,
    load_csv,
    sample_gaussian,
    sample_unit_sphere,
)
from .diagnostics import measure_local_optimality
from .geometry import PointSet
from .solvers import Solution, greedy, local_search

WORKERS_ENV = "VOLMAX_WORKERS"

FIG1 = dict(part_sizes=(3000,), k_values=(1,) + tuple(range(2, 21, 2)))
FIG2 = dict(part_sizes=(300,), k_values=(1,) + tuple(range(50, 301, 50)))
FIG3 = dict(part_sizes=tuple(range(500, 4001, 500)), k_values=(5, 10, 15, 20))


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


def _parts(config: ExperimentConfig, pool: Optional[PointSet], part_size: int, seed: int) -> list:
    if pool is not None:
        return partition_dataset(pool, config.m, part_size, derive_seed(seed, part_size))
    sampler = sample_unit_sphere if config.dataset == "sphere" else sample_gaussian
    return [sampler(part_size, config.d, derive_seed(seed, part_size, i)) for i in range(config.m)]


def _part_ratios(part: PointSet, k_values, epsilon: Optional[float] = None) -> list:
    """Measured ratio at every k.

    For greedy a single run at the largest k is reused, since greedy's first
    k picks do not depend on how many more follow.
    """
    if epsilon is not None:
        return [measure_local_optimality(part, local_search(part, k, epsilon)[0]).measured_ratio
                for k in k_values]
    full = greedy(part, max(k_values))
    out = []
    for k in k_values:
        sol = full if k == full.k else Solution.from_indices(part, full.indices[:k])
        out.append(measure_local_optimality(part, sol).measured_ratio)
    return out


def run_grid(config: ExperimentConfig, timing: bool = False) -> list:
    """One row per (part size, k): the per-repetition max over parts, averaged over seeds.

    Rows come out sorted by (k, part size) regardless of worker scheduling.
    ``wall_time`` is only filled in when ``timing`` is set, so that reports
    are byte-reproducible by default.
    """
    if config.dataset == "tightness":
        raise ValueError("the tightness instance has a fixed size; use it with solve")
    pool = None if config.is_generator else load_csv(config.dataset)
    mapper = "greedy" if config.epsilon is None else f"local_search({config.epsilon:g})"
    workers = worker_count()
    cells = {}
    with ThreadPoolExecutor(max_workers=workers) as ex:
        for part_size in config.part_sizes:
            ks = [k for k in config.k_values if k <= part_size]
            if not ks:
                continue
            start = time.perf_counter()
            per_rep = []
            for seed in config.seeds:
                parts = _parts(config, pool, part_size, seed)
                ratios = list(ex.map(lambda p: _part_ratios(p, ks, config.epsilon), parts))
                per_rep.append([max(col) for col in zip(*ratios)])
            elapsed = time.perf_counter() - start if timing else 0.0
            for j, k in enumerate(ks):
                mean = math.fsum(rep[j] for rep in per_rep) / len(per_rep)
                cells[(k, part_size)] = ReportRow(
                    config.experiment, k, part_size, mapper, mean,
                    1.0 + math.sqrt(k), config.seeds[0], elapsed,
                )
    return [cells[key] for key in sorted(cells)]
