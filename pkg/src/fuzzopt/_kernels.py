"""Hot numeric kernels.

Each kernel exists twice: a numba ``@njit`` version and a pure-numpy
version with identical semantics. The numba path is used when numba imports
and ``FUZZOPT_NUMBA`` is not set to ``0``; the choice is made once at import.
"""
import os

import numpy as np

PIVOT_OPTIMAL = 0
PIVOT_UNBOUNDED = 1
PIVOT_ITERATION_LIMIT = 2


def _env_wants_numba():
    return os.environ.get("FUZZOPT_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")


# ---------------------------------------------------------------------------
# simplex pivoting (Bland's rule, minimisation)
# ---------------------------------------------------------------------------

def _pivot_loop_py(T, basis, n_active, tol, max_iter):
    m = T.shape[0] - 1
    rhs = T.shape[1] - 1
    iters = 0
    while True:
        cost = T[m, :n_active]
        candidates = np.flatnonzero(cost < -tol)
        if candidates.size == 0:
            return PIVOT_OPTIMAL, iters
        if iters >= max_iter:
            return PIVOT_ITERATION_LIMIT, iters
        j = candidates[0]
        col = T[:m, j]
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:
            return PIVOT_UNBOUNDED, iters
        ratios = T[rows, rhs] / col[rows]
        best = ratios.min()
        # Bland: among minimal ratios leave the lowest-indexed basic variable
        tied = rows[ratios <= best + tol * max(1.0, abs(best))]
        r = tied[np.argmin(basis[tied])]
        T[r] /= T[r, j]
        factors = T[:, j].copy()
        factors[r] = 0.0
        T -= np.outer(factors, T[r])
        basis[r] = j
        iters += 1


def _pivot_loop_nb_impl(T, basis, n_active, tol, max_iter):
    m = T.shape[0] - 1
    ncol = T.shape[1]
    rhs = ncol - 1
    iters = 0
    while True:
        j = -1
        for k in range(n_active):
            if T[m, k] < -tol:
                j = k
                break
        if j < 0:
            return PIVOT_OPTIMAL, iters
        if iters >= max_iter:
            return PIVOT_ITERATION_LIMIT, iters
        best = np.inf
        for i in range(m):
            if T[i, j] > tol:
                ratio = T[i, rhs] / T[i, j]
                if ratio < best:
                    best = ratio
        if best == np.inf:
            return PIVOT_UNBOUNDED, iters
        r = -1
        slack = tol * max(1.0, abs(best))
        for i in range(m):
            if T[i, j] > tol:
                ratio = T[i, rhs] / T[i, j]
                if ratio <= best + slack:
                    if r < 0 or basis[i] < basis[r]:
                        r = i
        piv = T[r, j]
        for k in range(ncol):
            T[r, k] /= piv
        for i in range(m + 1):
            if i != r:
                f = T[i, j]
                if f != 0.0:
                    for k in range(ncol):
                        T[i, k] -= f * T[r, k]
        basis[r] = j
        iters += 1


# ---------------------------------------------------------------------------
# batched interval dot products: sum_i tau_i * [lo_i, hi_i] per level
# ---------------------------------------------------------------------------

def _interval_dot_batch_py(taus, lo, hi):
    # taus: (N, n); lo, hi: (n, L) -> (N, L), (N, L)
    a = taus[:, :, None] * lo[None, :, :]
    b = taus[:, :, None] * hi[None, :, :]
    return np.minimum(a, b).sum(axis=1), np.maximum(a, b).sum(axis=1)


def _interval_dot_batch_nb_impl(taus, lo, hi):
    N, n = taus.shape
    L = lo.shape[1]
    out_lo = np.zeros((N, L))
    out_hi = np.zeros((N, L))
    for t in range(N):
        for i in range(n):
            w = taus[t, i]
            for k in range(L):
                a = w * lo[i, k]
                b = w * hi[i, k]
                if a <= b:
                    out_lo[t, k] += a
                    out_hi[t, k] += b
                else:
                    out_lo[t, k] += b
                    out_hi[t, k] += a
    return out_lo, out_hi


try:
    import numba

    _pivot_loop_nb = numba.njit(cache=True)(_pivot_loop_nb_impl)
    _interval_dot_batch_nb = numba.njit(cache=True)(_interval_dot_batch_nb_impl)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an optional extra
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _env_wants_numba()


def pivot_loop(T, basis, n_active, tol, max_iter, use_numba=None):
    """Run Bland-rule simplex pivots on tableau ``T`` in place.

    ``T`` has the constraint rows first and the reduced-cost row last; the
    last column is the right-hand side. Only the first ``n_active`` columns
    may enter the basis. Returns ``(status, iterations)``.
    """
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        return _pivot_loop_nb(T, basis, int(n_active), float(tol), int(max_iter))
    return _pivot_loop_py(T, basis, int(n_active), float(tol), int(max_iter))


def interval_dot_batch(taus, lo, hi, use_numba=None):
    if use_numba is None:
        use_numba = USE_NUMBA
    taus = np.ascontiguousarray(taus, dtype=float)
    lo = np.ascontiguousarray(lo, dtype=float)
    hi = np.ascontiguousarray(hi, dtype=float)
    if use_numba:
        return _interval_dot_batch_nb(taus, lo, hi)
    return _interval_dot_batch_py(taus, lo, hi)
