"""Independent reference computations used by the tests.

Nothing here imports the package's arithmetic; each oracle is written from
the definitions with plain numpy so it can disagree with the implementation.
"""
import itertools

import numpy as np


def tri_endpoints(a, b, c, rho):
    rho = np.asarray(rho, dtype=float)
    return a + (b - a) * rho, c - (c - b) * rho


def trap_endpoints(a, b, c, d, rho):
    rho = np.asarray(rho, dtype=float)
    return a + (b - a) * rho, d - (d - c) * rho


def scale_endpoints(t, lo, hi):
    p, q = t * lo, t * hi
    return np.minimum(p, q), np.maximum(p, q)


def gh_endpoints(lo1, hi1, lo2, hi2):
    d1, d2 = lo1 - lo2, hi1 - hi2
    return np.minimum(d1, d2), np.maximum(d1, d2)


def dense(n=1001):
    return np.linspace(0.0, 1.0, n)


def vertex_enumeration_lp(c, A, b):
    """min c@x s.t. A x <= b, x >= 0, by enumerating basic solutions.

    Returns ``(value, x)`` or ``(None, None)`` if no vertex is feasible.
    Intended for bounded problems with a handful of variables.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = c.size
    G = np.vstack([A, -np.eye(n)])
    h = np.concatenate([b, np.zeros(n)])
    best, arg = None, None
    for rows in itertools.combinations(range(G.shape[0]), n):
        M = G[list(rows)]
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        x = np.linalg.solve(M, h[list(rows)])
        if np.all(G @ x <= h + 1e-9):
            v = float(c @ x)
            if best is None or v < best:
                best, arg = v, x
    return best, arg
