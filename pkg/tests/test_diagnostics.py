import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from volmax.data import sample_gaussian, sample_near_collinear, sample_unit_sphere
from volmax.diagnostics import (
    composition_bound,
    greedy_offline_bound,
    measure_local_optimality,
    position_log_ratios,
    tightness_instance,
    verify_offline_approximation,
)
from volmax.geometry import PointSet
from volmax.solvers import Solution, greedy

from conftest import oracle_maxvol, slogvol

pytestmark = pytest.mark.usefixtures("backend")


def _oracle_ratio(points, sol):
    """Max single-swap volume ratio by direct slogdet recomputation."""
    X = points.points
    V = X[list(sol.indices)]
    base = slogvol(V)
    best = -math.inf
    for row in range(points.n):
        if row in sol.indices:
            continue
        for pos in range(sol.k):
            S = V.copy()
            S[pos] = X[row]
            best = max(best, slogvol(S) - base)
    return 1.0 if best <= 1e-12 else math.exp(best)


# ------------------------------------------------------- local optimality

@pytest.mark.parametrize("k", range(2, 13))
def test_tightness_ratio_is_sqrt_k(k):
    P = tightness_instance(k)
    rep = measure_local_optimality(P, greedy(P, k))
    assert rep.measured_ratio == pytest.approx(math.sqrt(k), rel=1e-9)
    assert rep.theoretical_bound == pytest.approx(1 + math.sqrt(k))
    assert rep.argmax_swap == (0, k)


def test_tightness_four_ratio_two():
    P = tightness_instance(4)
    assert measure_local_optimality(P, greedy(P, 4)).measured_ratio == pytest.approx(2.0, rel=1e-12)


def test_k_one_ratio_is_one():
    P = sample_unit_sphere(50, 5, 0)
    assert measure_local_optimality(P, greedy(P, 1)).measured_ratio == 1.0
    G = sample_gaussian(50, 5, 0)
    assert measure_local_optimality(G, greedy(G, 1)).measured_ratio == 1.0


def test_k_equals_n_ratio_is_one():
    P = sample_gaussian(5, 8, 1)
    rep = measure_local_optimality(P, greedy(P, 5))
    assert rep.measured_ratio == 1.0 and rep.argmax_swap is None


@pytest.mark.parametrize("seed", range(30))
def test_measured_ratio_matches_slogdet_oracle(seed):
    P = sample_near_collinear(25, 6, seed, clusters=2, noise=1e-2) if seed % 2 else sample_gaussian(25, 6, seed)
    k = 1 + seed % 5
    sol = greedy(P, k)
    rep = measure_local_optimality(P, sol)
    assert rep.measured_ratio == pytest.approx(_oracle_ratio(P, sol), rel=1e-8)
    assert 1.0 <= rep.measured_ratio <= rep.theoretical_bound + 1e-9


def test_rank_deficient_reports():
    P = PointSet([(1, 0, 0), (2, 0, 0), (0, 1, 0), (0, 3, 0)])
    sol = greedy(P, 3)
    rep = measure_local_optimality(P, sol)
    assert rep.rank_deficient and not rep.incomparable and rep.measured_ratio == 1.0
    P2 = PointSet([(1, 0, 0), (2, 0, 0), (0, 1, 0), (0, 0, 1)])
    rep2 = measure_local_optimality(P2, Solution.from_indices(P2, [0, 1, 2]))
    assert rep2.rank_deficient and rep2.incomparable and rep2.measured_ratio == math.inf


def test_measure_rejects_foreign_solution():
    P = sample_gaussian(6, 3, 0)
    sol = greedy(P, 2)
    with pytest.raises(ValueError):
        measure_local_optimality(sample_gaussian(6, 3, 1), sol)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 40), st.integers(2, 10), st.integers(1, 10))
def test_greedy_local_optimality_bound(seed, n, d, k):
    k = min(k, n, d)
    P = sample_gaussian(n, d, seed)
    rep = measure_local_optimality(P, greedy(P, k))
    assert 1.0 <= rep.measured_ratio <= 1 + math.sqrt(k) + 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 8))
def test_per_position_refinement(seed, k):
    P = sample_near_collinear(30, 10, seed, clusters=k, noise=0.05)
    sol = greedy(P, k)
    per = position_log_ratios(P, sol)
    for i, lr in enumerate(per, start=1):
        assert lr <= math.log1p(math.sqrt(k + 1 - i)) + 1e-9


# ---------------------------------------------------------- instances

def test_tightness_instance_shape():
    P = tightness_instance(2)
    np.testing.assert_allclose(P.points, [(1, 1), (math.sqrt(2), 0), (0, math.sqrt(2))])
    for k in (3, 7):
        P = tightness_instance(k)
        assert P.n == k + 1 and P.dim == k
        np.testing.assert_allclose(np.linalg.norm(P.points, axis=1), math.sqrt(k))


def test_tightness_instance_volumes():
    P = tightness_instance(3)
    assert greedy(P, 3).log_vol.volume == pytest.approx(3.0)
    assert oracle_maxvol(P, 3)[0] == pytest.approx(1.5 * math.log(3))


@pytest.mark.parametrize("k", [1, 0, -3])
def test_tightness_instance_rejects_small_k(k):
    with pytest.raises(ValueError):
        tightness_instance(k)


# -------------------------------------------------------------- bounds

def test_greedy_offline_bound_values():
    assert greedy_offline_bound(1) == 0.0
    assert greedy_offline_bound(2) == pytest.approx(0.8814, abs=1e-4)
    assert greedy_offline_bound(2) == pytest.approx(math.log(1 + math.sqrt(2)))


@pytest.mark.parametrize("k", range(7, 41))
def test_offline_bound_below_power_bound(k):
    assert greedy_offline_bound(k) < k * math.log(2) + 0.5 * math.lgamma(k + 1)


@pytest.mark.parametrize("k", range(2, 101))
def test_offline_bound_ordering(k):
    b, fact = greedy_offline_bound(k), math.lgamma(k + 1)
    if k >= 4:
        assert b < fact
    else:
        # the product only beats k! from k = 4 on
        assert b > fact


def test_composition_bound_values():
    assert composition_bound(1, 0) == pytest.approx(2 * math.log(2))
    assert composition_bound(2, math.sqrt(2)) == pytest.approx(9.0707, abs=1e-4)
    assert math.exp(composition_bound(2, math.sqrt(2))) == pytest.approx(8.70e3, rel=1e-3)
    assert composition_bound(3, 0.5) == pytest.approx(6 * math.log(9))
    with pytest.raises(ValueError):
        composition_bound(2, -0.1)


# ------------------------------------------------- offline approximation

def test_offline_tightness_four():
    rep = verify_offline_approximation(tightness_instance(4), 4)
    assert rep.gap == pytest.approx(math.log(2), rel=1e-12)
    assert rep.within_bound and rep.within_factorial_bound


@pytest.mark.parametrize("k", [1, 2, 3])
def test_offline_axis_set_gap_zero(k):
    rep = verify_offline_approximation(PointSet(np.diag([3.0, 2.0, 1.0])), k)
    assert rep.gap == pytest.approx(0.0, abs=1e-12)


def test_offline_random_instance_against_oracle():
    P = sample_gaussian(10, 4, 42)
    rep = verify_offline_approximation(P, 3)
    assert rep.log_maxvol == pytest.approx(oracle_maxvol(P, 3)[0], abs=1e-10)
    assert rep.gap <= rep.bound
