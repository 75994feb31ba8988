# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled pivot kernel.

Semantics and arithmetic mirror _speedups_py.py exactly; every update is
elementwise (row p is processed with factor 0.0 rather than skipped, so
signed zeros match the numpy twin) and the extension is built with
-ffp-contract=off, keeping results bit-identical across backends. Any
behavior change here must be made in the numpy twin as well.
"""

from libc.math cimport fabs, INFINITY


def run_phase(double[:, ::1] T, double[::1] xB, double[::1] cost, double[::1] cost2,
              long long[::1] basis, signed char[::1] vstat, double[::1] lo,
              double[::1] hi, unsigned char[::1] enterable, double dual_tol,
              double pivot_tol, long long bland_after, long long max_iter):
    """Run one simplex phase to completion, mutating all arrays in place."""
    cdef Py_ssize_t m = T.shape[0]
    cdef Py_ssize_t n = T.shape[1]
    cdef long long iters = 0
    cdef long long degen = 0
    cdef bint bland
    cdef Py_ssize_t i, j, q, p
    cdef long long best_key, bk
    cdef signed char st
    cdef double d, best, sigma, a, t, t_rows, t_own, thresh, lb, ub
    cdef double delta, base_val, piv, f, fc, fc2, mag

    while iters < max_iter:
        bland = degen >= bland_after

        # pricing: largest |reduced cost| among eligible, first index on ties;
        # Bland mode takes the first eligible index outright
        q = -1
        best = 0.0
        for j in range(n):
            st = vstat[j]
            if st == 2 or enterable[j] == 0:
                continue
            d = cost[j]
            if st == 0:
                if d >= -dual_tol:
                    continue
            elif st == 1:
                if d <= dual_tol:
                    continue
            else:
                if -dual_tol <= d <= dual_tol:
                    continue
            if bland:
                q = j
                break
            if fabs(d) > best:
                best = fabs(d)
                q = j
        if q < 0:
            return (0, iters, degen)
        sigma = 1.0 if cost[q] < 0.0 else -1.0

        # ratio test pass 1: smallest blocking step over basic rows
        t_rows = INFINITY
        for i in range(m):
            a = sigma * T[i, q]
            if a > pivot_tol:
                lb = lo[basis[i]]
                if lb == -INFINITY:
                    continue
                t = (xB[i] - lb) / a
            elif a < -pivot_tol:
                ub = hi[basis[i]]
                if ub == INFINITY:
                    continue
                t = (ub - xB[i]) / (-a)
            else:
                continue
            if t < 0.0:
                t = 0.0
            if t < t_rows:
                t_rows = t

        t_own = hi[q] - lo[q]
        if t_own <= t_rows:
            if t_own == INFINITY:
                return (1, iters, degen)
            # bound flip, no basis change
            delta = sigma * t_own
            for i in range(m):
                xB[i] -= delta * T[i, q]
            vstat[q] = 1 if vstat[q] == 0 else 0
            iters += 1
            continue

        # ratio test pass 2: among near-ties pick the largest pivot magnitude
        # (first on ties); Bland mode picks the smallest leaving variable index
        thresh = t_rows + 1e-9 * (1.0 + t_rows)
        p = -1
        best = -1.0
        best_key = 0
        for i in range(m):
            a = sigma * T[i, q]
            if a > pivot_tol:
                lb = lo[basis[i]]
                if lb == -INFINITY:
                    continue
                t = (xB[i] - lb) / a
            elif a < -pivot_tol:
                ub = hi[basis[i]]
                if ub == INFINITY:
                    continue
                t = (ub - xB[i]) / (-a)
            else:
                continue
            if t < 0.0:
                t = 0.0
            if t > thresh:
                continue
            if bland:
                bk = basis[i]
                if p < 0 or bk < best_key:
                    best_key = bk
                    p = i
            else:
                mag = fabs(T[i, q])
                if mag > best:
                    best = mag
                    p = i

        if vstat[q] == 0:
            base_val = lo[q]
        elif vstat[q] == 1:
            base_val = hi[q]
        else:
            base_val = 0.0
        delta = sigma * t_rows
        a = sigma * T[p, q]
        for i in range(m):
            xB[i] -= delta * T[i, q]
        vstat[basis[p]] = 0 if a > 0.0 else 1

        piv = T[p, q]
        for j in range(n):
            T[p, j] /= piv
        # row p is eliminated last (with factor 0.0, as the numpy twin does)
        # so every other row reads the pristine normalized pivot row
        for i in range(m):
            if i == p:
                continue
            f = T[i, q]
            for j in range(n):
                T[i, j] -= f * T[p, j]
        for j in range(n):
            T[p, j] -= 0.0 * T[p, j]
        fc = cost[q]
        for j in range(n):
            cost[j] -= fc * T[p, j]
        fc2 = cost2[q]
        for j in range(n):
            cost2[j] -= fc2 * T[p, j]

        xB[p] = base_val + delta
        basis[p] = q
        vstat[q] = 2
        if t_rows <= pivot_tol:
            degen += 1
        iters += 1
    return (2, iters, degen)
