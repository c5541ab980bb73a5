"""Fritz-John and KKT certificates for fuzzy optimization problems.

A problem minimises a fuzzy objective subject to constraints ``Y_j(x) ⪯ 0̃``.
Feasibility uses the weak order; a constraint is active when its value is
0̃ (every cut within tolerance of [0, 0]).

Multiplier searches are LPs: with nonnegative multipliers the endpoints of
``κ₀∇H + Σ κ_j ∇Y_j`` are the same combinations of the gradients' endpoints,
so "zero in every cut" becomes two linear inequalities per level and
coordinate.
"""
from dataclasses import dataclass, field
import itertools

import numpy as np

from fuzzopt import config
from fuzzopt.calculus import convexity_sample, evaluate, expr_from_json, expr_to_json, grad
from fuzzopt.core import (
    FuzzyMatrix, add, check_grid, endpoints, is_zero, merge_levels,
    scalar_mul, uniform_grid,
)
from fuzzopt.lp import Constraint, LinearProgram, lp_feasible, lp_solve

VERIFY_TOL = 1e-8


class InfeasiblePoint(ValueError):
    def __init__(self, constraint, level, message=None):
        self.constraint = constraint
        self.level = level
        super().__init__(message or f"constraint {constraint} violated at level {level}")


class NoCertificate(ValueError):
    """The multiplier system has no solution on the level grid."""


@dataclass(frozen=True)
class FuzzyProblem:
    objective: object
    constraints: tuple = ()

    def __post_init__(self):
        cons = tuple(self.constraints)
        for c in cons:
            if c.dim != self.objective.dim:
                raise ValueError("all expressions must share the objective's dimension")
        object.__setattr__(self, "constraints", cons)

    @property
    def dim(self):
        return self.objective.dim

    @classmethod
    def from_json(cls, obj):
        return cls(expr_from_json(obj["objective"]),
                   tuple(expr_from_json(c) for c in obj.get("constraints", [])))

    def to_json(self):
        return {"objective": expr_to_json(self.objective),
                "constraints": [expr_to_json(c) for c in self.constraints]}


@dataclass
class MultiplierCertificate:
    kappa0: float
    kappas: np.ndarray
    active_set: tuple
    levels: np.ndarray = field(repr=False)
    residuals: tuple = field(repr=False)

    def to_json(self):
        return {
            "kappa0": self.kappa0,
            "kappas": self.kappas.tolist(),
            "active_set": list(self.active_set),
            "residuals": _residual_tables(self.residuals, self.levels),
        }


@dataclass
class VerificationReport:
    nonnegative: bool
    nontrivial: bool
    complementary: bool
    stationarity: bool
    worst_residual: float
    residuals: tuple = field(repr=False)
    levels: np.ndarray = field(repr=False)

    @property
    def passed(self):
        return self.nonnegative and self.nontrivial and self.complementary and self.stationarity

    def to_json(self):
        return {
            "passed": self.passed,
            "nonnegative": self.nonnegative,
            "nontrivial": self.nontrivial,
            "complementary": self.complementary,
            "stationarity": self.stationarity,
            "worst_residual": self.worst_residual,
            "residuals": _residual_tables(self.residuals, self.levels),
        }


def _residual_tables(residuals, levels):
    out = []
    for r in residuals:
        lo, hi = endpoints(r, levels)
        out.append([[float(a), float(b), float(c)] for a, b, c in zip(levels, lo, hi)])
    return out


def _point(p, x):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (p.dim,):
        raise ValueError(f"problem has dimension {p.dim}, got a point of length {x.size}")
    return x


def constraint_values(p, x):
    x = _point(p, x)
    return [evaluate(c, x) for c in p.constraints]


def active_indices(constraints, x, tol=None, n_levels=None):
    """Indices of constraints equal to 0̃ at ``x``; raises :class:`InfeasiblePoint`."""
    tol = config.ACTIVE_TOL if tol is None else tol
    active = []
    for j, c in enumerate(constraints):
        val = evaluate(c, x)
        lv = check_grid(val, n_levels=n_levels)
        lo, hi = endpoints(val, lv)
        bad = np.flatnonzero((lo > tol) | (hi > tol))
        if bad.size:
            raise InfeasiblePoint(j, float(lv[bad[0]]))
        if is_zero(val, tol=tol, n_levels=n_levels):
            active.append(j)
    return tuple(active)


def active_set(p, x, tol=None, n_levels=None):
    return active_indices(p.constraints, _point(p, x), tol=tol, n_levels=n_levels)


def _gradients(p, x):
    x = _point(p, x)
    return grad(p.objective, x), [grad(c, x) for c in p.constraints]


def _grid(p, gradients, n_levels):
    gH, gY = gradients
    parts = [uniform_grid(n_levels)]
    for g in [gH, *gY]:
        parts.extend(d.levels for d in g.partials)
    return merge_levels(*parts)


def stationarity_residuals(gH, gY, kappa0, kappas):
    """Per-coordinate ``κ₀ D_iH + Σ κ_j D_iY_j``."""
    out = []
    for i in range(len(gH)):
        acc = scalar_mul(kappa0, gH[i])
        for k, g in zip(kappas, gY):
            if k != 0.0:
                acc = add(acc, scalar_mul(k, g[i]))
        out.append(acc)
    return tuple(out)


def _stationarity_rows(tables, levels):
    """LP rows: for each coordinate and level, sum κ·lower <= 0 and sum κ·upper >= 0.

    ``tables`` is a list of ``(lo, hi)`` pairs of shape ``(n, L)`` per
    multiplier column.
    """
    n = tables[0][0].shape[0]
    rows = []
    for i in range(n):
        for k in range(levels.size):
            lo_row = np.array([t[0][i, k] for t in tables])
            hi_row = np.array([t[1][i, k] for t in tables])
            rows.append((lo_row, hi_row))
    return rows


def fritz_john_find(p, x, n_levels=None, active_tol=None):
    """Search nonnegative ``(κ₀, κ_Λ)`` summing to 1 that satisfy stationarity.

    Among admissible multipliers the LP prefers the largest ``κ₀``.
    Raises :class:`NoCertificate` if none exist on the grid.
    """
    x = _point(p, x)
    act = active_set(p, x, tol=active_tol, n_levels=n_levels)
    gH, gY = _gradients(p, x)
    lv = _grid(p, (gH, gY), n_levels)
    tables = [gH.endpoint_table(lv)] + [gY[j].endpoint_table(lv) for j in act]
    nv = len(tables)
    cons = [Constraint(np.ones(nv), "=", 1.0)]
    for lo_row, hi_row in _stationarity_rows(tables, lv):
        cons.append(Constraint(lo_row, "<=", 0.0))
        cons.append(Constraint(hi_row, ">=", 0.0))
    obj = np.zeros(nv)
    obj[0] = -1.0
    out = lp_solve(LinearProgram(obj, cons, [(0.0, None)] * nv))
    if not out.ok:
        raise NoCertificate(f"no Fritz-John multipliers at x={x.tolist()} ({out.status})")
    kappas = np.zeros(len(p.constraints))
    for j, v in zip(act, out.point[1:]):
        kappas[j] = v
    kappa0 = float(out.point[0])
    res = stationarity_residuals(gH, gY, kappa0, kappas)
    return MultiplierCertificate(kappa0, kappas, act, check_grid(*res, levels=lv), res)


def kkt_find(p, x, n_levels=None, active_tol=None):
    """Search ``κ_Λ >= 0`` with ``κ₀ = 1``; the LP picks the smallest total multiplier."""
    x = _point(p, x)
    act = active_set(p, x, tol=active_tol, n_levels=n_levels)
    gH, gY = _gradients(p, x)
    lv = _grid(p, (gH, gY), n_levels)
    kappas = np.zeros(len(p.constraints))
    if not act:
        res = stationarity_residuals(gH, gY, 1.0, kappas)
        if all(_zero_in(r, lv, VERIFY_TOL) for r in res):
            return MultiplierCertificate(1.0, kappas, act, lv, res)
        raise NoCertificate("no active constraints and the objective gradient excludes zero")
    h_lo, h_hi = gH.endpoint_table(lv)
    tables = [gY[j].endpoint_table(lv) for j in act]
    cons = []
    for (lo_row, hi_row), (hl, hh) in zip(_stationarity_rows(tables, lv),
                                          zip(h_lo.ravel(), h_hi.ravel())):
        cons.append(Constraint(lo_row, "<=", -hl))
        cons.append(Constraint(hi_row, ">=", -hh))
    nv = len(act)
    out = lp_solve(LinearProgram(np.ones(nv), cons, [(0.0, None)] * nv))
    if not out.ok:
        raise NoCertificate(f"no KKT multipliers at x={x.tolist()} ({out.status})")
    for j, v in zip(act, out.point):
        kappas[j] = v
    res = stationarity_residuals(gH, gY, 1.0, kappas)
    return MultiplierCertificate(1.0, kappas, act, check_grid(*res, levels=lv), res)


def _zero_in(f, levels, tol):
    lo, hi = endpoints(f, check_grid(f, levels=levels))
    return bool(np.all(lo <= tol) and np.all(hi >= -tol))


def _distance_from_zero(f, levels):
    lo, hi = endpoints(f, check_grid(f, levels=levels))
    return float(np.max(np.maximum(np.maximum(lo, -hi), 0.0)))


def fritz_john_verify(p, x, kappa0, kappas, tol=VERIFY_TOL, n_levels=None, active_tol=None):
    """Check a Fritz-John multiplier tuple condition by condition."""
    x = _point(p, x)
    kappas = np.atleast_1d(np.asarray(kappas, dtype=float)).reshape(-1)
    if kappas.size != len(p.constraints):
        raise ValueError("one multiplier per constraint is required")
    active_tol = config.ACTIVE_TOL if active_tol is None else active_tol
    gH, gY = _gradients(p, x)
    lv = _grid(p, (gH, gY), n_levels)
    allk = np.concatenate([[kappa0], kappas])
    nonneg = bool(np.all(allk >= -tol))
    nontrivial = bool(np.any(np.abs(allk) > tol))
    values = constraint_values(p, x)
    complementary = all(k <= tol or is_zero(scalar_mul(k, v), tol=active_tol * max(1.0, k), n_levels=n_levels)
                        for k, v in zip(kappas, values))
    res = stationarity_residuals(gH, gY, float(kappa0), kappas)
    worst = max(_distance_from_zero(r, lv) for r in res)
    return VerificationReport(nonneg, nontrivial, complementary, worst <= tol, worst,
                              res, check_grid(*res, levels=lv))


def kkt_verify(p, x, kappas, tol=VERIFY_TOL, n_levels=None, active_tol=None):
    return fritz_john_verify(p, x, 1.0, kappas, tol=tol, n_levels=n_levels, active_tol=active_tol)


def gradient_matrix(p, x, active=None):
    """Fuzzy matrix with rows = coordinates, columns = ``∇H`` then active ``∇Y_j``."""
    x = _point(p, x)
    if active is None:
        active = active_set(p, x)
    gH, gY = _gradients(p, x)
    cols = [gH.partials] + [gY[j].partials for j in active]
    return FuzzyMatrix.from_columns(cols)


@dataclass
class IndependenceReport:
    independent: bool
    theta: np.ndarray = None
    orthants_checked: int = 0


def linear_independence_check(vectors, n_levels=None):
    """Decide fuzzy linear independence by enumerating sign orthants of ``θ``.

    Inside an orthant the endpoint selection of each ``θ_k U_k`` is fixed, so
    "zero in every component at every level" is an LP in ``|θ_k|`` with
    ``sum |θ_k| = 1``. Opposite orthants are equivalent, so the first sign is
    fixed to ``+``.
    """
    vectors = [tuple(v) for v in vectors]
    K = len(vectors)
    if K == 0:
        raise ValueError("need at least one fuzzy vector")
    if K > 8:
        raise ValueError("orthant enumeration supports at most 8 vectors")
    n = len(vectors[0])
    if any(len(v) != n for v in vectors):
        raise ValueError("fuzzy vectors differ in length")
    lv = merge_levels(uniform_grid(n_levels), *(m.levels for v in vectors for m in v))
    lo = np.empty((K, n, lv.size))
    hi = np.empty_like(lo)
    for k, v in enumerate(vectors):
        for i, m in enumerate(v):
            lo[k, i], hi[k, i] = endpoints(m, lv)
    checked = 0
    for tail in itertools.product((1.0, -1.0), repeat=K - 1):
        sigma = np.array((1.0,) + tail)
        checked += 1
        # per vector: lower/upper endpoint coefficient of a_k
        sel_lo = np.where(sigma[:, None, None] > 0, lo, -hi)
        sel_hi = np.where(sigma[:, None, None] > 0, hi, -lo)
        cons = [Constraint(np.ones(K), "=", 1.0)]
        for i in range(n):
            for k in range(lv.size):
                cons.append(Constraint(sel_lo[:, i, k], "<=", 0.0))
                cons.append(Constraint(sel_hi[:, i, k], ">=", 0.0))
        out = lp_feasible(cons, bounds=[(0.0, None)] * K)
        if out.ok:
            return IndependenceReport(False, sigma * out.point, checked)
    return IndependenceReport(True, None, checked)


@dataclass
class FirstOrderReport:
    passed: bool
    flags: np.ndarray
    levels: np.ndarray


def first_order_unconstrained_check(e, x, tol=None, n_levels=None):
    """Zero in every gradient coordinate at every level."""
    tol = config.TOL if tol is None else tol
    g = grad(e, x)
    lv = merge_levels(uniform_grid(n_levels), *(d.levels for d in g.partials))
    lo, hi = g.endpoint_table(lv)
    flags = (lo <= tol) & (hi >= -tol)
    return FirstOrderReport(bool(flags.all()), flags, lv)


def kkt_sufficiency_report(p, x, kappas, box, convexity_trials=1000, seed=None, tol=VERIFY_TOL):
    """KKT verification plus sampled convexity of every expression on ``box``.

    The verdict is advisory: convexity is only sampled, never certified.
    """
    kkt = kkt_verify(p, x, kappas, tol=tol)
    conv = {"objective": convexity_sample(p.objective, box, convexity_trials, seed)}
    for j, c in enumerate(p.constraints):
        conv[f"constraint_{j}"] = convexity_sample(c, box, convexity_trials, seed)
    supported = kkt.passed and all(r.ok for r in conv.values())
    return {
        "verdict": "sufficient-conditions-supported" if supported else "not supported",
        "basis": "sampling",
        "kkt": kkt,
        "convexity": conv,
    }
