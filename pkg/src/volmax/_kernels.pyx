# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Same contracts as ``volmax._fallback``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, INFINITY

cnp.import_array()

cdef double REORTH = 0.7071067811865476


cdef inline double _dot(const double* a, const double* b, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t i
    cdef double s = 0.0
    for i in range(d):
        s += a[i] * b[i]
    return s


cdef inline void _axpy(double alpha, const double* x, double* y, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(d):
        y[i] += alpha * x[i]


cdef double _mgs(double* r, const double* Q, Py_ssize_t t, double in_norm,
                 Py_ssize_t d) noexcept nogil:
    """Orthogonalize ``r`` in place against ``Q[:t]``; returns the residual norm."""
    cdef Py_ssize_t l
    cdef double norm
    for l in range(t):
        _axpy(-_dot(Q + l * d, r, d), Q + l * d, r, d)
    norm = sqrt(_dot(r, r, d))
    if t > 0 and norm < REORTH * in_norm:
        for l in range(t):
            _axpy(-_dot(Q + l * d, r, d), Q + l * d, r, d)
        norm = sqrt(_dot(r, r, d))
    return norm


def greedy_select(X, Py_ssize_t k, double rank_tol, double tie_rtol):
    cdef double[:, ::1] R = np.array(X, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = R.shape[0], d = R.shape[1]
    cdef double[:, ::1] Q = np.zeros((k, d))
    cdef double[::1] sq = np.empty(n)
    cdef double[::1] in_norms = np.empty(n)
    cdef double[::1] r = np.empty(d)
    cdef double[::1] a = np.empty(max(k, 1))
    cdef unsigned char[::1] chosen = np.zeros(n, dtype=np.uint8)
    order_arr = np.empty(k, dtype=np.int64)
    cdef cnp.int64_t[::1] order = order_arr
    cdef Py_ssize_t i, j, l, t = 0
    cdef double top, norm, c, cut, lim

    with nogil:
        for i in range(n):
            sq[i] = _dot(&R[i, 0], &R[i, 0], d)
            in_norms[i] = sqrt(sq[i])
        while t < k:
            top = -1.0
            for i in range(n):
                if not chosen[i] and sq[i] > top:
                    top = sq[i]
            cut = top * (1.0 - tie_rtol)
            j = -1
            for i in range(n):
                if not chosen[i] and sq[i] >= cut:
                    j = i
                    break
            for l in range(d):
                r[l] = R[j, l]
            norm = sqrt(_dot(&r[0], &r[0], d))
            if norm < REORTH * in_norms[j]:
                # one classical pass against the accepted basis, as in the fallback
                for i in range(t):
                    a[i] = _dot(&Q[i, 0], &r[0], d)
                for i in range(t):
                    _axpy(-a[i], &Q[i, 0], &r[0], d)
                norm = sqrt(_dot(&r[0], &r[0], d))
            lim = in_norms[j] if in_norms[j] > 1.0 else 1.0
            if norm <= rank_tol * lim:
                break
            for l in range(d):
                Q[t, l] = r[l] / norm
            order[t] = j
            chosen[j] = 1
            for i in range(n):
                c = _dot(&R[i, 0], &Q[t, 0], d)
                _axpy(-c, &Q[t, 0], &R[i, 0], d)
                sq[i] = _dot(&R[i, 0], &R[i, 0], d)
            t += 1
    n_independent = t
    if t < k:
        order_arr[t:] = np.flatnonzero(np.asarray(chosen) == 0)[: k - t]
    return order_arr, n_independent


def brute_force_search(X, Py_ssize_t k, double rank_tol, double tie_atol):
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t n = Xv.shape[0], d = Xv.shape[1]
    cdef double[:, ::1] Q = np.zeros((k, d))
    cdef double[::1] acc = np.zeros(k)
    cdef double[::1] in_norms = np.empty(n)
    cdef double[::1] r = np.empty(d)
    cdef cnp.int64_t[::1] idx = np.zeros(k, dtype=np.int64)
    best_arr = np.arange(k, dtype=np.int64)
    cdef cnp.int64_t[::1] best_idx = best_arr
    cdef double best = -INFINITY, norm, lg, lim
    cdef Py_ssize_t i, l, t, j
    cdef bint found = False

    with nogil:
        for i in range(n):
            in_norms[i] = sqrt(_dot(&Xv[i, 0], &Xv[i, 0], d))
        t = 0
        idx[0] = -1
        while t >= 0:
            idx[t] += 1
            j = idx[t]
            if j > n - k + t:
                t -= 1
                continue
            for l in range(d):
                r[l] = Xv[j, l]
            norm = _mgs(&r[0], &Q[0, 0], t, in_norms[j], d)
            lim = in_norms[j] if in_norms[j] > 1.0 else 1.0
            if norm <= rank_tol * lim:
                continue
            lg = log(norm)
            if t > 0:
                lg += acc[t - 1]
            if t == k - 1:
                if lg > best + tie_atol:
                    best = lg
                    found = True
                    for l in range(k):
                        best_idx[l] = idx[l]
                continue
            acc[t] = lg
            for l in range(d):
                Q[t, l] = r[l] / norm
            t += 1
            idx[t] = idx[t - 1]
    if not found:
        return np.arange(k, dtype=np.int64), -np.inf
    return best_arr, best


def swap_log_ratios(Q, L, W, double rank_tol):
    cdef const double[:, ::1] Qv = np.ascontiguousarray(Q, dtype=np.float64)
    cdef const double[:, ::1] Lv = np.ascontiguousarray(L, dtype=np.float64)
    cdef const double[:, ::1] Wv = np.ascontiguousarray(W, dtype=np.float64)
    cdef Py_ssize_t k = Qv.shape[0], m = Wv.shape[0], d = Wv.shape[1]
    Linv = np.linalg.solve(L, np.eye(k)) if k else np.zeros((0, 0))
    cdef double[::1] h = np.ascontiguousarray(np.einsum("ij,ij->j", Linv, Linv))
    out_arr = np.empty((k, m))
    zero_arr = np.zeros((k, m), dtype=bool)
    cdef double[:, ::1] out = out_arr
    cdef cnp.uint8_t[:, ::1] zero = zero_arr.view(np.uint8)
    cdef double[::1] r = np.empty(d)
    cdef double[::1] c = np.empty(max(k, 1))
    cdef double[::1] a = np.empty(max(k, 1))
    cdef Py_ssize_t i, j, l, p
    cdef double r2, s, ratio2, tol2 = rank_tol * rank_tol

    with nogil:
        for j in range(m):
            for l in range(d):
                r[l] = Wv[j, l]
            for i in range(k):
                c[i] = 0.0
            # classical Gram-Schmidt twice, matching the fallback
            for p in range(2):
                for i in range(k):
                    a[i] = _dot(&Qv[i, 0], &r[0], d)
                for i in range(k):
                    c[i] += a[i]
                    _axpy(-a[i], &Qv[i, 0], &r[0], d)
            r2 = _dot(&r[0], &r[0], d)
            # back-substitution for L^T a = c
            for i in range(k - 1, -1, -1):
                s = c[i]
                for l in range(i + 1, k):
                    s -= Lv[l, i] * a[l]
                a[i] = s / Lv[i, i]
            for i in range(k):
                ratio2 = a[i] * a[i] + h[i] * r2
                if ratio2 <= tol2:
                    zero[i, j] = 1
                    out[i, j] = -INFINITY
                else:
                    out[i, j] = 0.5 * log(ratio2)
    return out_arr, zero_arr
