"""Small dense linear programs: two-phase simplex with Bland's rule."""
from dataclasses import dataclass, field
import logging
import math

import numpy as np

from fuzzopt import _kernels

log = logging.getLogger(__name__)

FEAS_TOL = 1e-8
PIVOT_TOL = 1e-11

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"

_RELATIONS = ("<=", "=", ">=")


class LpNumericError(RuntimeError):
    """The pivot loop exceeded its iteration guard or lost feasibility."""


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple
    relation: str
    rhs: float

    def __post_init__(self):
        if self.relation not in _RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        object.__setattr__(self, "rhs", float(self.rhs))


@dataclass(frozen=True)
class LinearProgram:
    """Minimise ``objective @ x`` subject to ``constraints`` and ``bounds``.

    ``bounds`` holds one ``(lo, hi)`` pair per variable; ``None`` means
    unbounded on that side. When omitted every variable is ``>= 0``.
    """
    objective: tuple
    constraints: tuple = ()
    bounds: tuple = None

    def __post_init__(self):
        obj = tuple(float(c) for c in self.objective)
        if not obj:
            raise ValueError("linear program needs at least one variable")
        object.__setattr__(self, "objective", obj)
        cons = tuple(c if isinstance(c, Constraint) else Constraint(*c) for c in self.constraints)
        for c in cons:
            if len(c.coeffs) != len(obj):
                raise ValueError("constraint arity does not match objective")
        object.__setattr__(self, "constraints", cons)
        if self.bounds is None:
            bnds = tuple((0.0, None) for _ in obj)
        else:
            bnds = tuple(self.bounds)
            if len(bnds) != len(obj):
                raise ValueError("one bound pair per variable is required")
        object.__setattr__(self, "bounds", bnds)

    @property
    def n(self):
        return len(self.objective)


@dataclass(frozen=True)
class LpOutcome:
    status: str
    point: np.ndarray = None
    value: float = None
    iterations: int = 0
    max_violation: float = field(default=0.0, compare=False)

    @property
    def ok(self):
        return self.status == OPTIMAL


def _finite(v):
    return v is not None and math.isfinite(v)


def _standardize(p):
    """Rewrite ``p`` over nonnegative variables ``u`` with ``x = offset + S u``."""
    n = p.n
    cols = []  # (original index, sign)
    offset = np.zeros(n)
    extra_rows = []
    for j, (lo, hi) in enumerate(p.bounds):
        lo_f, hi_f = _finite(lo), _finite(hi)
        if lo_f:
            offset[j] = lo
            k = len(cols)
            cols.append((j, 1.0))
            if hi_f:
                if hi < lo:
                    return None
                extra_rows.append((k, hi - lo))
        elif hi_f:
            offset[j] = hi
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    S = np.zeros((n, len(cols)))
    for k, (j, s) in enumerate(cols):
        S[j, k] = s
    rows, rels, rhs = [], [], []
    for c in p.constraints:
        a = np.asarray(c.coeffs)
        rows.append(a @ S)
        rels.append(c.relation)
        rhs.append(c.rhs - a @ offset)
    for k, ub in extra_rows:
        r = np.zeros(len(cols))
        r[k] = 1.0
        rows.append(r)
        rels.append("<=")
        rhs.append(ub)
    cost = np.asarray(p.objective) @ S
    A = np.array(rows).reshape(len(rows), len(cols))
    return A, rels, np.asarray(rhs, dtype=float), cost, S, offset


def _max_violation(p, x):
    worst = 0.0
    for c in p.constraints:
        lhs = float(np.dot(c.coeffs, x))
        if c.relation == "<=":
            v = lhs - c.rhs
        elif c.relation == ">=":
            v = c.rhs - lhs
        else:
            v = abs(lhs - c.rhs)
        worst = max(worst, v)
    for xj, (lo, hi) in zip(x, p.bounds):
        if _finite(lo):
            worst = max(worst, lo - xj)
        if _finite(hi):
            worst = max(worst, xj - hi)
    return worst


def lp_solve(p, max_iter=5000, verbose=False):
    """Solve ``p`` with the two-phase dense simplex method.

    Returns an :class:`LpOutcome`; raises :class:`LpNumericError` when the
    iteration guard trips.
    """
    std = _standardize(p)
    if std is None:
        return LpOutcome(INFEASIBLE)
    A, rels, b, cost, S, offset = std
    m, nu = A.shape
    A = A.copy()
    rels = list(rels)
    for i in range(m):
        if b[i] < 0:
            A[i] = -A[i]
            b[i] = -b[i]
            rels[i] = {"<=": ">=", ">=": "<=", "=": "="}[rels[i]]

    n_slack = sum(r != "=" for r in rels)
    art_rows = [i for i in range(m) if rels[i] != "<="]
    n_art = len(art_rows)
    ncol = nu + n_slack + n_art
    T = np.zeros((m + 1, ncol + 1))
    T[:m, :nu] = A
    T[:m, -1] = b
    basis = np.zeros(m, dtype=np.int64)
    s = nu
    for i in range(m):
        if rels[i] == "<=":
            T[i, s] = 1.0
            basis[i] = s
            s += 1
        elif rels[i] == ">=":
            T[i, s] = -1.0
            s += 1
    for k, i in enumerate(art_rows):
        col = nu + n_slack + k
        T[i, col] = 1.0
        basis[i] = col

    iters = 0
    if n_art:
        # phase 1: minimise the sum of artificials
        T[m, :] = 0.0
        for i in art_rows:
            T[m, :] -= T[i, :]
        for k in range(n_art):
            T[m, nu + n_slack + k] = 0.0
        status, it = _kernels.pivot_loop(T, basis, ncol, PIVOT_TOL, max_iter)
        iters += it
        if status == _kernels.PIVOT_ITERATION_LIMIT:
            raise LpNumericError("phase 1 exceeded the iteration guard")
        if -T[m, -1] > FEAS_TOL:
            return LpOutcome(INFEASIBLE, iterations=iters)
        # drive zero-level artificials out of the basis or drop their rows
        keep = np.ones(m, dtype=bool)
        for r in range(m):
            if basis[r] >= nu + n_slack:
                cands = np.flatnonzero(np.abs(T[r, :nu + n_slack]) > 1e-9)
                if cands.size:
                    j = cands[0]
                    T[r] /= T[r, j]
                    f = T[:, j].copy()
                    f[r] = 0.0
                    T -= np.outer(f, T[r])
                    basis[r] = j
                else:
                    keep[r] = False
        if not keep.all():
            T = np.vstack([T[:m][keep], T[m:]])
            basis = basis[keep]
            m = T.shape[0] - 1
        T = np.ascontiguousarray(np.delete(T, np.s_[nu + n_slack:ncol], axis=1))
        ncol = nu + n_slack

    # phase 2
    c_full = np.zeros(ncol)
    c_full[:nu] = cost
    T[m, :ncol] = c_full
    T[m, -1] = 0.0
    for r in range(m):
        cb = c_full[basis[r]]
        if cb != 0.0:
            T[m, :] -= cb * T[r, :]
    status, it = _kernels.pivot_loop(T, basis, ncol, PIVOT_TOL, max_iter)
    iters += it
    if verbose:
        log.debug("final tableau\n%s\nbasis %s", T, basis)
    if status == _kernels.PIVOT_ITERATION_LIMIT:
        raise LpNumericError("phase 2 exceeded the iteration guard")
    if status == _kernels.PIVOT_UNBOUNDED:
        return LpOutcome(UNBOUNDED, iterations=iters)

    u = np.zeros(ncol)
    u[basis] = T[:m, -1]
    x = offset + S @ u[:nu]
    viol = _max_violation(p, x)
    if viol > FEAS_TOL * max(1.0, float(np.abs(x).max(initial=0.0))):
        raise LpNumericError(f"returned point violates constraints by {viol:.3g}")
    return LpOutcome(OPTIMAL, x, float(np.dot(p.objective, x)), iters, viol)


def lp_feasible(constraints, bounds=None, n=None):
    """Phase-1 feasibility: find any point satisfying ``constraints``/``bounds``."""
    constraints = tuple(c if isinstance(c, Constraint) else Constraint(*c) for c in constraints)
    if n is None:
        if constraints:
            n = len(constraints[0].coeffs)
        elif bounds is not None:
            n = len(bounds)
        else:
            raise ValueError("cannot infer the number of variables")
    if bounds is None:
        bounds = tuple((0.0, None) for _ in range(n))
    if not constraints:
        pt = []
        for lo, hi in bounds:
            if _finite(lo) and _finite(hi) and hi < lo:
                return LpOutcome(INFEASIBLE)
            v = 0.0
            if _finite(lo):
                v = max(v, lo)
            if _finite(hi):
                v = min(v, hi)
            pt.append(v)
        return LpOutcome(OPTIMAL, np.asarray(pt), 0.0)
    return lp_solve(LinearProgram((0.0,) * n, constraints, bounds))
