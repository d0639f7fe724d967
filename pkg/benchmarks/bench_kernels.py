"""Time the compiled kernels against the numpy fallback.

The kernel modules are called directly, bypassing the size-based dispatch
of swap ratios in ``volmax._backend``.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--seed 0]
"""

import argparse
import time

import numpy as np

from volmax import _backend
from volmax.geometry import RANK_TOL, TIE_RTOL, OrthoBasis


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def cases(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((3000, 784))
    yield "greedy n=3000 d=784 k=20", lambda kern: kern.greedy_select(X, 20, RANK_TOL, TIE_RTOL)
    S = rng.standard_normal((300, 784))
    yield "greedy n=300 d=784 k=300", lambda kern: kern.greedy_select(S, 300, RANK_TOL, TIE_RTOL)
    B = rng.standard_normal((24, 8))
    yield "brute force n=24 d=8 k=5", lambda kern: kern.brute_force_search(B, 5, RANK_TOL, 1e-12)
    V = X[:20]
    basis = OrthoBasis.from_vectors(V)
    Q, L = basis.units, basis.triangular()
    Vs = B[:5]
    small = OrthoBasis.from_vectors(Vs)
    yield "swap ratios k=5 m=19 d=8", lambda kern: [
        kern.swap_log_ratios(small.units, small.triangular(), B[5:], RANK_TOL) for _ in range(1000)]
    yield "swap ratios k=20 m=2980 d=784", lambda kern: kern.swap_log_ratios(Q, L, X[20:], RANK_TOL)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    names = [n for n in ("python", "compiled") if n in _backend.BACKENDS]
    print(f"{'case':<32}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) == 2 else ""))
    for label, run in cases(args.seed):
        times = [_best_of(lambda: run(_backend.BACKENDS[n]), args.repeat) for n in names]
        line = f"{label:<32}" + "".join(f"{t:>11.4f}s" for t in times)
        if len(times) == 2:
            line += f"{times[0] / times[1]:>11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
