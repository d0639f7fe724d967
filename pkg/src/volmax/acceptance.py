"""Exit-criteria checks, shared by ``volmax verify`` and the test suite.

Each check returns a :class:`CheckResult`; a check fails when any instance
violates its bound or when it overruns its time limit.
"""

from __future__ import annotations

import math
import os
import tempfile
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import geometry
from .coreset import CoresetFamily, Mapper, verify_composition
from .data import (
    ExperimentConfig,
    derive_seed,
    sample_gaussian,
    sample_near_collinear,
    sample_unit_sphere,
)
from .diagnostics import (
    greedy_offline_bound,
    measure_local_optimality,
    tightness_instance,
    verify_offline_approximation,
)
from .experiments import FIG1, run_grid
from .geometry import PointSet, gram_matrix
from .solvers import (
    candidate_rows,
    greedy,
    local_search,
    swap_log_ratios,
    swap_volume_in,
)


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed: float
    limit: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number}. {self.name}: {self.detail} ({self.elapsed:.2f}s, limit {self.limit:g}s)"


def _timed(number: int, name: str, limit: float, body: Callable[[], tuple]) -> CheckResult:
    start = time.perf_counter()
    ok, detail = body()
    elapsed = time.perf_counter() - start
    if elapsed > limit:
        ok, detail = False, f"{detail}; over time limit"
    return CheckResult(number, name, bool(ok), detail, elapsed, limit)


def random_instance(index: int, family: str, n_max: int, d_max: int, k_max: int, salt: int = 0):
    """A seeded ``(points, k)`` pair from one of the generator families.

    ``family`` is ``gaussian``, ``sphere`` or ``collinear`` (near-collinear
    clusters with noise between 1e-2 and 1e-5). Always ``k <= d`` and
    ``k < n``.
    """
    rng = np.random.default_rng(derive_seed(salt, index))
    k = int(rng.integers(1, k_max + 1))
    d = int(rng.integers(max(k, 2), d_max + 1))
    n = int(rng.integers(k + 1, n_max + 1))
    seed = derive_seed(salt, index, 1)
    if family == "gaussian":
        pts = sample_gaussian(n, d, seed)
    elif family == "sphere":
        pts = sample_unit_sphere(n, d, seed)
    else:
        noise = float(10.0 ** -rng.integers(2, 6))
        pts = sample_near_collinear(n, d, seed, clusters=int(rng.integers(1, 4)), noise=noise)
    return pts, k


FAMILIES = ("gaussian", "sphere", "collinear")


# 1 -------------------------------------------------------------------------

def check_tightness() -> CheckResult:
    def body():
        worst = 0.0
        for k in range(2, 13):
            pts = tightness_instance(k)
            rep = measure_local_optimality(pts, greedy(pts, k))
            worst = max(worst, abs(rep.measured_ratio - math.sqrt(k)) / math.sqrt(k))
        return worst <= 1e-9, f"k=2..12, max relative error {worst:.2e} (tol 1e-9)"
    return _timed(1, "tightness exactness", 1.0, body)


# 2 -------------------------------------------------------------------------

def check_local_optimality_bound(instances: int = 1002) -> CheckResult:
    def body():
        violations, worst, full_rank = 0, 0.0, 0
        for i in range(instances):
            pts, k = random_instance(i, FAMILIES[i % 3], 100, 30, 10, salt=2)
            sol = greedy(pts, k)
            if sol.rank_deficient:
                continue
            full_rank += 1
            rep = measure_local_optimality(pts, sol)
            slack = rep.measured_ratio - (1 + math.sqrt(k))
            worst = max(worst, rep.measured_ratio / (1 + math.sqrt(k)))
            violations += slack > 1e-9
        ok = violations == 0 and full_rank >= 1000
        return ok, (f"{full_rank} full-rank instances, {violations} violations, "
                    f"max ratio/bound {worst:.4f}")
    return _timed(2, "greedy local optimality <= 1+sqrt(k)", 300.0, body)


# 3 -------------------------------------------------------------------------

def check_offline_approximation(instances: int = 210) -> CheckResult:
    def body():
        violations, worst = 0, 0.0
        for i in range(instances):
            pts, k = random_instance(i, FAMILIES[i % 3], 14, 8, 5, salt=3)
            rep = verify_offline_approximation(pts, k)
            violations += not rep.within_bound
            if rep.bound > 0:
                worst = max(worst, rep.gap / rep.bound)
            elif rep.gap > 1e-9:
                worst = math.inf
        return violations == 0, f"{instances} instances, {violations} violations, max gap/bound {worst:.4f}"
    return _timed(3, "offline approximation vs brute force", 120.0, body)


# 4 -------------------------------------------------------------------------

def random_family(index: int, salt: int = 4):
    rng = np.random.default_rng(derive_seed(salt, index))
    k = int(rng.integers(1, 4))
    d = int(rng.integers(max(k, 2), 7))
    m = int(rng.integers(1, 4))
    gen = FAMILIES[index % 3]
    parts = []
    for p in range(m):
        n_i = int(rng.integers(k, 13))
        seed = derive_seed(salt, index, p)
        if gen == "gaussian":
            parts.append(sample_gaussian(n_i, d, seed))
        elif gen == "sphere":
            parts.append(sample_unit_sphere(n_i, d, seed))
        else:
            parts.append(sample_near_collinear(n_i, d, seed, clusters=2, noise=1e-2))
    eps = float(rng.choice([0.05, 0.2, 1.0]))
    return parts, k, eps


def check_composition(families: int = 102) -> CheckResult:
    def body():
        bad_greedy = bad_ls = 0
        worst = 0.0
        for i in range(families):
            parts, k, eps = random_family(i)
            g = verify_composition(CoresetFamily.build(parts, k, "greedy"), k)
            ls = verify_composition(CoresetFamily.build(parts, k, Mapper("local_search", eps)), k)
            bad_greedy += not g.within_bound
            bad_ls += not ls.within_bound
            worst = max(worst, g.log_alpha_observed / g.log_alpha_bound)
        ok = bad_greedy == 0 and bad_ls == 0
        return ok, (f"{families} families, greedy violations {bad_greedy}, local-search violations {bad_ls}, "
                    f"max observed/bound (log) {worst:.4f}")
    return _timed(4, "composable coreset bounds", 300.0, body)


# 5 -------------------------------------------------------------------------

def swap_budget(k: int, epsilon: float) -> int:
    return math.ceil(k * math.log(k) / math.log1p(epsilon)) + 1


def local_search_instances():
    """Full-rank instances for the local-search contract: tightness sets and random draws."""
    for k in range(2, 9):
        yield f"tightness({k})", tightness_instance(k), k
    for i in range(150):
        pts, k = random_instance(i, FAMILIES[i % 3], 40, 12, 6, salt=5)
        yield f"random#{i}", pts, k


def check_local_search(epsilons=(0.01, 0.1, 0.5)) -> CheckResult:
    def body():
        runs = bad_opt = bad_count = swaps_total = 0
        for _, pts, k in local_search_instances():
            for eps in epsilons:
                sol, swaps = local_search(pts, k, eps)
                if sol.rank_deficient:
                    continue
                runs += 1
                swaps_total += swaps
                bad_count += swaps > swap_budget(k, eps)
                # independent route: rebuild every swapped set from scratch
                best = -math.inf
                for row in candidate_rows(pts, sol):
                    for pos in range(k):
                        gain = swap_volume_in(pts, sol, pos, int(row), mode="recompute")
                        best = max(best, gain.log_ratio)
                bad_opt += not best < math.log1p(eps)
        ok = runs > 0 and bad_opt == 0 and bad_count == 0
        return ok, (f"{runs} runs, {swaps_total} swaps, optimality violations {bad_opt}, "
                    f"swap-budget violations {bad_count}")
    return _timed(5, "local search contract", 300.0, body)


# 6 -------------------------------------------------------------------------

def _random_orthogonal(d: int, rng) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def check_numerical_core(instances: int = 300) -> CheckResult:
    def body():
        worst_det = worst_swap = worst_perm = worst_orth = 0.0
        for i in range(instances):
            rng = np.random.default_rng(derive_seed(6, i))
            d = int(rng.integers(1, 21))
            k = int(rng.integers(1, d + 1))
            X = rng.standard_normal((k, d))
            lv = geometry.log_volume(X)
            if lv.is_zero:
                return False, f"instance {i}: full-rank set reported as zero volume"
            det = np.linalg.det(gram_matrix(X))
            worst_det = max(worst_det, abs(math.exp(2 * lv.value) - det) / abs(det))
            perm = rng.permutation(k)
            worst_perm = max(worst_perm, abs(geometry.log_volume(X[perm]).value - lv.value))
            Q = _random_orthogonal(d, rng)
            worst_orth = max(worst_orth, abs(geometry.log_volume(X @ Q.T).value - lv.value))

            n = k + int(rng.integers(1, 6))
            pts = PointSet(np.vstack([X, rng.standard_normal((n - k, d))]))
            sol = greedy(pts, k)
            if sol.rank_deficient:
                continue
            rows, inc, _ = swap_log_ratios(pts, sol)
            for j, row in enumerate(rows):
                for pos in range(k):
                    rec = swap_volume_in(pts, sol, pos, int(row), mode="recompute")
                    if rec.kind == "finite":
                        worst_swap = max(worst_swap, abs(rec.log_ratio - inc[pos, j]))
        ok = worst_det <= 1e-8 and worst_swap <= 1e-7 and worst_perm <= 1e-10 and worst_orth <= 1e-8
        return ok, (f"det rel err {worst_det:.1e} (<=1e-8), swap modes {worst_swap:.1e} (<=1e-7), "
                    f"permutation {worst_perm:.1e} (<=1e-10), orthogonal {worst_orth:.1e} (<=1e-8)")
    return _timed(6, "numerical core equivalence", 120.0, body)


# 7 -------------------------------------------------------------------------

def check_desk_replication(part_size: int = 500) -> CheckResult:
    def body():
        config = ExperimentConfig(dataset="sphere", m=10, part_sizes=(part_size,),
                                  k_values=FIG1["k_values"], d=784, seeds=(0, 1, 2, 3, 4))
        rows = run_grid(config)
        inside = all(1.0 <= r.measured_ratio <= r.bound for r in rows)
        peak = max(r.measured_ratio for r in rows)
        soft = "below" if peak < 1.5 else "NOT below"
        return inside, (f"{len(rows)} rows, all in [1, 1+sqrt(k)]: {inside}; "
                        f"max ratio {peak:.4f} ({soft} 1.5, soft check)")
    return _timed(7, "desk-scale fig1 on the unit sphere", 600.0, body)


# 8 -------------------------------------------------------------------------

def check_determinism() -> CheckResult:
    from .cli import main

    def body():
        commands = [
            ["fig1", "--part-size", "60", "--m", "3", "--d", "20", "--k-grid", "1,2,4,8", "--reps", "2"],
            ["fig2", "--part-size", "40", "--m", "2", "--d", "30", "--k-grid", "1,20,40", "--reps", "2"],
            ["fig3", "--sizes", "30,60", "--m", "2", "--d", "25", "--k-grid", "5,10", "--reps", "2"],
            ["solve", "--dataset", "sphere", "--n", "80", "--d", "10", "--k", "5",
             "--algorithm", "local-search", "--epsilon", "0.05"],
        ]
        mismatched = []
        with tempfile.TemporaryDirectory() as tmp:
            for cmd in commands:
                for fmt in ("csv", "json"):
                    outputs = []
                    for attempt in range(2):
                        path = os.path.join(tmp, f"{cmd[0]}-{fmt}-{attempt}.{fmt}")
                        code = main(cmd + ["--seed", "7", "--out", path, "--format", fmt], quiet=True)
                        if code != 0:
                            return False, f"{cmd[0]} exited with {code}"
                        with open(path, "rb") as fh:
                            outputs.append(fh.read())
                    if outputs[0] != outputs[1]:
                        mismatched.append(f"{cmd[0]}/{fmt}")
        return not mismatched, f"{len(commands) * 2} report files re-generated, mismatches: {mismatched or 'none'}"
    return _timed(8, "byte-identical reruns", 120.0, body)


CRITERIA = [
    (check_tightness, "fast"),
    (check_local_optimality_bound, "fast"),
    (check_offline_approximation, "full"),
    (check_composition, "full"),
    (check_local_search, "fast"),
    (check_numerical_core, "fast"),
    (check_desk_replication, "full"),
    (check_determinism, "fast"),
]


def run(level: str = "fast", echo: Callable[[str], None] = print) -> list:
    if level not in ("fast", "full"):
        raise ValueError(f"level must be fast or full, not {level!r}")
    results = []
    for check, tier in CRITERIA:
        if tier == "full" and level != "full":
            continue
        result = check()
        echo(result.line())
        results.append(result)
    return results
