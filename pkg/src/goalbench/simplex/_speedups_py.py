"""Pure numpy pivot kernel.

Semantics and arithmetic mirror _speedups.pyx exactly: every floating-point
operation is elementwise (no reassociated reductions, no FMA), so the two
kernels produce bit-identical tableaus. Any behavior change here must be
made in the .pyx twin as well.
"""

import numpy as np

# variable status codes (shared contract with the compiled kernel)
AT_LOWER = 0
AT_UPPER = 1
BASIC = 2
FREE_NB = 3

# return codes
OPTIMAL = 0
UNBOUNDED = 1
ITER_LIMIT = 2

_I64_MAX = np.iinfo(np.int64).max


def run_phase(T, xB, cost, cost2, basis, vstat, lo, hi, enterable,
              dual_tol, pivot_tol, bland_after, max_iter):
    """Run one simplex phase to completion, mutating all arrays in place.

    cost is the active phase's reduced-cost row; cost2 is carried through
    the same pivots so the next phase starts consistent. Returns
    (code, iterations, degenerate_steps).
    """
    m, n = T.shape
    inf = np.inf
    iters = 0
    degen = 0
    while iters < max_iter:
        bland = degen >= bland_after

        # pricing: largest |reduced cost| among eligible, first index on ties;
        # Bland mode takes the first eligible index outright
        nonbasic = vstat != BASIC
        can = nonbasic & (enterable != 0)
        elig = can & (
            ((vstat == AT_LOWER) & (cost < -dual_tol))
            | ((vstat == AT_UPPER) & (cost > dual_tol))
            | ((vstat == FREE_NB) & (np.abs(cost) > dual_tol))
        )
        if not elig.any():
            return OPTIMAL, iters, degen
        if bland:
            q = int(np.argmax(elig))
        else:
            q = int(np.argmax(np.where(elig, np.abs(cost), -1.0)))
        sigma = 1.0 if cost[q] < 0.0 else -1.0

        # ratio test pass 1: smallest blocking step over basic rows
        col = T[:, q].copy()
        a = sigma * col
        lo_b = lo[basis]
        hi_b = hi[basis]
        pos = (a > pivot_tol) & (lo_b != -inf)
        neg = (a < -pivot_tol) & (hi_b != inf)
        t = np.full(m, inf)
        with np.errstate(divide="ignore", invalid="ignore"):
            t_pos = (xB - lo_b) / a
            t_neg = (hi_b - xB) / (-a)
        t[pos] = t_pos[pos]
        t[neg] = t_neg[neg]
        np.maximum(t, 0.0, out=t)
        t_rows = float(t.min()) if m else inf

        t_own = float(hi[q] - lo[q])
        if t_own <= t_rows:
            if t_own == inf:
                return UNBOUNDED, iters, degen
            # bound flip, no basis change
            delta = sigma * t_own
            xB -= delta * col
            vstat[q] = AT_UPPER if vstat[q] == AT_LOWER else AT_LOWER
            iters += 1
            continue

        # ratio test pass 2: among near-ties pick the largest pivot magnitude
        # (first on ties); Bland mode picks the smallest leaving variable index
        thresh = t_rows + 1e-9 * (1.0 + t_rows)
        cand = (pos | neg) & (t <= thresh)
        if bland:
            p = int(np.argmin(np.where(cand, basis, _I64_MAX)))
        else:
            p = int(np.argmax(np.where(cand, np.abs(col), -1.0)))

        if vstat[q] == AT_LOWER:
            base_val = float(lo[q])
        elif vstat[q] == AT_UPPER:
            base_val = float(hi[q])
        else:
            base_val = 0.0
        delta = sigma * t_rows
        xB -= delta * col
        leaving = int(basis[p])
        vstat[leaving] = AT_LOWER if a[p] > 0.0 else AT_UPPER

        piv = float(T[p, q])
        T[p, :] /= piv
        f = T[:, q].copy()
        f[p] = 0.0
        T -= f[:, None] * T[p, None, :]
        fc = float(cost[q])
        cost -= fc * T[p, :]
        fc2 = float(cost2[q])
        cost2 -= fc2 * T[p, :]

        xB[p] = base_val + delta
        basis[p] = q
        vstat[q] = BASIC
        if t_rows <= pivot_tol:
            degen += 1
        iters += 1
    return ITER_LIMIT, iters, degen
