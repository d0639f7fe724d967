"""Pure numpy versions of the hot kernels.

Each function here has a compiled twin in ``_kernels.pyx`` with the same
signature and the same tie and rank rules. ``volmax._backend`` picks one.
"""

import math

import numpy as np

_REORTH = math.sqrt(0.5)


def greedy_select(X, k, rank_tol, tie_rtol):
    """Pivoted Gram-Schmidt: the row order greedy volume maximization picks.

    Returns ``(order, n_independent)``. When fewer than ``k`` rows are
    independent, ``order[n_independent:]`` holds the lowest-index leftovers.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    n, d = X.shape
    R = X.copy()
    in_norms = np.sqrt(np.einsum("ij,ij->i", X, X))
    sq = in_norms ** 2
    chosen = np.zeros(n, dtype=bool)
    Q = np.zeros((k, d))
    order = np.empty(k, dtype=np.int64)
    t = 0
    while t < k:
        cand = np.where(chosen, -1.0, sq)
        top = cand.max()
        j = int(np.flatnonzero(cand >= top * (1.0 - tie_rtol))[0])
        r = R[j].copy()
        norm = math.sqrt(r @ r)
        if norm < _REORTH * in_norms[j]:
            r -= Q[:t].T @ (Q[:t] @ r)
            norm = math.sqrt(r @ r)
        if norm <= rank_tol * max(1.0, in_norms[j]):
            break
        q = r / norm
        Q[t] = q
        order[t] = j
        chosen[j] = True
        t += 1
        R -= np.outer(R @ q, q)
        sq = np.einsum("ij,ij->i", R, R)
    n_independent = t
    if t < k:
        order[t:] = np.flatnonzero(~chosen)[: k - t]
    return order, n_independent


def _orth_rows(rows, Q):
    """Residuals of ``rows`` against orthonormal ``Q`` (MGS + conditional pass)."""
    R = rows.copy()
    for q in Q:
        R -= np.outer(R @ q, q)
    norms = np.sqrt(np.einsum("ij,ij->i", R, R))
    redo = norms < _REORTH * np.sqrt(np.einsum("ij,ij->i", rows, rows))
    if redo.any() and len(Q):
        sub = R[redo]
        for q in Q:
            sub -= np.outer(sub @ q, q)
        R[redo] = sub
        norms[redo] = np.sqrt(np.einsum("ij,ij->i", sub, sub))
    return R, norms


def brute_force_search(X, k, rank_tol, tie_atol):
    """Exhaustive lexicographic search for the max-volume ``k``-subset.

    A later subset replaces the incumbent only if its log-volume is larger by
    more than ``tie_atol``. Returns ``(best_rows, best_log)`` with
    ``best_log = -inf`` when every subset is degenerate.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    n, d = X.shape
    in_norms = np.sqrt(np.einsum("ij,ij->i", X, X))
    limits = np.maximum(1.0, in_norms) * rank_tol
    best = [-math.inf, None]
    combo = [0] * k
    Q = np.zeros((k, d))

    def descend(t, start, acc):
        stop = n - k + t + 1
        rows = np.arange(start, stop)
        R, norms = _orth_rows(X[start:stop], Q[:t])
        alive = norms > limits[start:stop]
        if t == k - 1:
            logs = np.where(alive, acc + np.log(np.where(alive, norms, 1.0)), -math.inf)
            if logs.max() <= best[0] + tie_atol:
                return
            for j, val in zip(rows, logs):
                if val > best[0] + tie_atol:
                    combo[t] = int(j)
                    best[0] = float(val)
                    best[1] = list(combo)
            return
        for pos in np.flatnonzero(alive):
            combo[t] = int(rows[pos])
            Q[t] = R[pos] / norms[pos]
            descend(t + 1, combo[t] + 1, acc + math.log(norms[pos]))

    descend(0, 0, 0.0)
    if best[1] is None:
        return np.arange(k, dtype=np.int64), -math.inf
    return np.asarray(best[1], dtype=np.int64), best[0]


def swap_log_ratios(Q, L, W, rank_tol):
    """Log volume ratios for replacing each basis vector with each row of ``W``.

    ``Q`` holds the orthonormal basis rows and ``L`` the lower-triangular
    factor with ``V = L @ Q``. Writing ``w = V.T a + r`` with ``r`` orthogonal
    to the span, the swapped volume ratio for position ``i`` satisfies
    ``ratio**2 = a_i**2 + |r|**2 * inv(L L^T)[i, i]`` (rank-one determinant
    update of the Gram matrix).

    Returns ``(log_ratio, is_zero)``, both of shape ``(k, m)``.
    """
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    W = np.ascontiguousarray(W, dtype=np.float64)
    k = Q.shape[0]
    C = W @ Q.T
    Rw = W - C @ Q
    C2 = Rw @ Q.T
    Rw -= C2 @ Q
    C += C2
    r2 = np.einsum("ij,ij->i", Rw, Rw)
    A = np.linalg.solve(L.T, C.T) if k else np.zeros((0, W.shape[0]))
    Linv = np.linalg.solve(L, np.eye(k)) if k else np.zeros((0, 0))
    h = np.einsum("ij,ij->j", Linv, Linv)
    ratio2 = A ** 2 + h[:, None] * r2[None, :]
    is_zero = ratio2 <= rank_tol ** 2
    with np.errstate(divide="ignore"):
        log_ratio = np.where(is_zero, -math.inf, 0.5 * np.log(np.where(is_zero, 1.0, ratio2)))
    return log_ratio, is_zero
