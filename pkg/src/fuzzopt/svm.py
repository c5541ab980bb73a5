"""Hard-margin support vector machine for fuzzy-number data.

Model: minimise ``½‖λ‖²`` subject to, for every point ``i``,

    Y_i(λ, ℓ) = 1 - y_i (λᵀU_i - ℓ) ⪯ 0̃

with a crisp normal ``λ`` and bias ``ℓ``. Support points carry ``κ_i > 0``
and need ``0 ∈ Y_i`` at every level up to the bias-set height ``ρ_max``.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import itertools

import numpy as np

from fuzzopt import config
from fuzzopt.calculus import FuzzyExpr, Term, grad
from fuzzopt.core import (
    FuzzyNumber, Interval, as_fuzzy_vector, check_grid, dot, endpoints, merge_levels,
    number_to_json, scalar_mul, uniform_grid,
)
from fuzzopt.optimality import FuzzyProblem, stationarity_residuals

MAX_SUPPORT = 4


class EmptyIntersection(ValueError):
    """No λ lies in the stationarity interval at every level."""


class EmptyBias(ValueError):
    """Support-point bias windows do not meet even at level 0."""


class NoSeparator(ValueError):
    pass


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class FuzzyDataset:
    points: tuple
    labels: tuple

    def __post_init__(self):
        pts = tuple(as_fuzzy_vector(p) for p in self.points)
        labels = tuple(int(y) for y in self.labels)
        if not pts:
            raise ValueError("dataset is empty")
        if len(pts) != len(labels):
            raise ValueError("points and labels differ in length")
        if any(y not in (-1, 1) for y in labels):
            raise ValueError("labels must be -1 or +1")
        n = len(pts[0])
        if any(len(p) != n for p in pts):
            raise ValueError("points differ in dimension")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self):
        return len(self.points[0])

    def __len__(self):
        return len(self.points)

    @property
    def y(self):
        return np.asarray(self.labels, dtype=float)

    def core_bounds(self):
        lo = np.array([[m.core.lo for m in p] for p in self.points])
        hi = np.array([[m.core.hi for m in p] for p in self.points])
        return lo, hi

    def cores(self):
        """Core midpoints, shape ``(N, n)``."""
        lo, hi = self.core_bounds()
        return 0.5 * (lo + hi)

    def has_point_cores(self):
        lo, hi = self.core_bounds()
        return bool(np.all(lo == hi))

    def knots(self):
        return merge_levels(*(m.levels for p in self.points for m in p))

    @classmethod
    def from_json(cls, obj):
        pts, labels = [], []
        for item in obj["points"]:
            pts.append(item["coords"])
            labels.append(item["label"])
        return cls(tuple(pts), tuple(labels))

    def to_json(self):
        return {"points": [{"coords": [number_to_json(m) for m in p], "label": y}
                           for p, y in zip(self.points, self.labels)]}


def _grid(d, n_levels=None, extra=()):
    return merge_levels(uniform_grid(n_levels), d.knots(), *extra)


def svm_stationary_lambda(d, kappa, tol=None, n_levels=None):
    """λ from ``0 ∈ λ - Σ κ_i y_i U_iρ`` at every level.

    Per coordinate the admissible set is the core of ``Σ κ_i y_i U_i``
    (the family is nested). The core midpoint is returned; it is the only
    choice when cores are points.
    """
    tol = config.TOL if tol is None else tol
    kappa = np.atleast_1d(np.asarray(kappa, dtype=float)).ravel()
    if kappa.size != len(d):
        raise ValueError("one multiplier per data point is required")
    if np.any(kappa < -tol):
        raise ValueError("multipliers must be nonnegative")
    if abs(float(kappa @ d.y)) > tol:
        raise ValueError("multipliers must satisfy sum(kappa * y) = 0")
    w = kappa * d.y
    lam = np.empty(d.dim)
    for c in range(d.dim):
        v = dot(w, [p[c] for p in d.points])
        lv = check_grid(v, n_levels=n_levels)
        lo, hi = endpoints(v, lv)
        a, b = lo.max(), hi.min()
        if a > b + tol * (1.0 + abs(a)):
            raise EmptyIntersection(f"coordinate {c}: level intervals have no common point")
        lam[c] = 0.5 * (lo[-1] + hi[-1])
        if np.any(lam[c] < lo - tol * (1.0 + abs(lam[c]))) or np.any(lam[c] > hi + tol * (1.0 + abs(lam[c]))):
            raise EmptyIntersection(f"coordinate {c}: core midpoint misses a lower level")
    return lam


@dataclass
class BiasSet:
    levels: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    rho_max: float

    def interval(self, rho):
        if rho > self.rho_max:
            return None
        a = np.interp(rho, self.levels, np.nan_to_num(self.lo, nan=np.inf))
        b = np.interp(rho, self.levels, np.nan_to_num(self.hi, nan=-np.inf))
        return Interval(float(a), float(max(a, b)))

    def top(self):
        return self.interval(self.rho_max)

    def table(self):
        rows = []
        for r, a, b in zip(self.levels, self.lo, self.hi):
            empty = np.isnan(a)
            rows.append([float(r), None if empty else float(a), None if empty else float(b)])
        return rows

    def to_json(self):
        return {"rho_max": self.rho_max, "levels": self.table()}

    def to_csv(self):
        lines = ["rho,lo,hi"]
        for r, a, b in self.table():
            lines.append(f"{r!r},{'' if a is None else repr(a)},{'' if b is None else repr(b)}")
        return "\n".join(lines) + "\n"


def bias_window(d, lam, i):
    """``{ℓ : 0 ∈ Y_i}`` per level, as a fuzzy number (or family)."""
    w = dot(lam, d.points[i])
    shift = -float(d.labels[i])
    return w + FuzzyNumber.crisp(shift)


def _last_nonneg_root(levels, pairs_lo, pairs_hi, tol):
    """Largest ρ with ``min(hi) - max(lo) >= 0``, exact for piecewise-linear data.

    The gap is concave on each grid segment and non-increasing overall, so the
    first segment where it turns negative holds the root, and the root is the
    earliest zero among the individual ``hi_a - lo_b`` lines there.
    """
    gap = pairs_hi.min(axis=0) - pairs_lo.max(axis=0)
    neg = np.flatnonzero(gap < -tol)
    if neg.size == 0:
        return 1.0
    k = int(neg[0])
    if k == 0:
        return None
    r0, r1 = levels[k - 1], levels[k]
    best = r1
    for a in range(pairs_hi.shape[0]):
        for b in range(pairs_lo.shape[0]):
            f0 = pairs_hi[a, k - 1] - pairs_lo[b, k - 1]
            f1 = pairs_hi[a, k] - pairs_lo[b, k]
            if f1 < -tol:
                f0 = max(f0, 0.0)
                best = min(best, r0 + (r1 - r0) * f0 / (f0 - f1))
    return float(best)


def svm_bias_set(d, lam, support, n_levels=None, tol=None):
    """Intersect the bias windows of the support points level by level."""
    tol = config.TOL if tol is None else tol
    support = tuple(int(i) for i in support)
    if not support:
        raise ValueError("support set is empty")
    lam = np.asarray(lam, dtype=float)
    wins = [bias_window(d, lam, i) for i in support]
    lv = merge_levels(uniform_grid(n_levels), *(w.levels for w in wins))
    tabs = [endpoints(w, lv) for w in wins]
    los = np.array([t[0] for t in tabs])
    his = np.array([t[1] for t in tabs])
    scale = 1.0 + float(np.abs(los).max() + np.abs(his).max())
    rho_max = _last_nonneg_root(lv, los, his, tol * scale)
    if rho_max is None:
        raise EmptyBias(f"bias windows of support {list(support)} are disjoint at level 0")
    lv = merge_levels(lv, [rho_max])
    tabs = [endpoints(w, lv) for w in wins]
    lo = np.max([t[0] for t in tabs], axis=0)
    hi = np.min([t[1] for t in tabs], axis=0)
    above = lv > rho_max
    at = np.isclose(lv, rho_max, rtol=0.0, atol=1e-12)
    # at the exact crossing the window is a single point up to rounding
    mid = 0.5 * (lo[at] + hi[at])
    lo[at] = np.minimum(lo[at], mid)
    hi[at] = np.maximum(hi[at], mid)
    lo[above] = np.nan
    hi[above] = np.nan
    return BiasSet(lv, lo, hi, rho_max)


def svm_constraint_value(d, lam, ell, i):
    """``Y_i(λ, ℓ) = 1 - y_i(λᵀU_i - ℓ)`` level-wise."""
    y = float(d.labels[i])
    w = dot(np.asarray(lam, dtype=float), d.points[i])
    return scalar_mul(-y, w) + FuzzyNumber.crisp(1.0 + y * float(ell))


def svm_margin_report(d, lam, ell, n_levels=None):
    """Core margin and satisfaction level σ_i per point.

    σ_i is the smallest ρ₀ such that the worst endpoint of ``y_i(λᵀU_iρ - ℓ)``
    is at least 1 on ``[ρ₀, 1]``; ``None`` when even the core misses the margin.
    """
    lam = np.asarray(lam, dtype=float)
    lv = _grid(d, n_levels)
    cores = d.cores()
    rows = []
    for i, (p, y) in enumerate(zip(d.points, d.labels)):
        lo, hi = endpoints(dot(lam, p), lv)
        m = lo - ell if y > 0 else ell - hi
        core_margin = float(y * (cores[i] @ lam - ell))
        if m[-1] < 1.0:
            sigma = None
        elif m[0] >= 1.0:
            sigma = 0.0
        else:
            k = int(np.flatnonzero(m < 1.0)[-1])
            # m is non-decreasing and linear between grid levels
            sigma = float(lv[k] + (lv[k + 1] - lv[k]) * (1.0 - m[k]) / (m[k + 1] - m[k]))
        rows.append({"index": i, "core_margin": core_margin, "satisfaction_level": sigma,
                     "levels_satisfied": [bool(v >= 1.0) for v in m]})
    return rows


def svm_problem(d):
    """The model as a :class:`FuzzyProblem` in the variables ``(λ, ℓ)``."""
    n = d.dim
    unit = lambda k: tuple(int(j == k) for j in range(n + 1))
    obj = FuzzyExpr(n + 1, tuple(Term(FuzzyNumber.crisp(0.5), tuple(2 * u for u in unit(k)))
                                 for k in range(n)))
    cons = []
    for p, y in zip(d.points, d.labels):
        terms = [Term(scalar_mul(-y, p[k]), unit(k)) for k in range(n)]
        terms.append(Term(FuzzyNumber.crisp(y), unit(n)))
        terms.append(Term(FuzzyNumber.crisp(1.0), (0,) * (n + 1)))
        cons.append(FuzzyExpr(n + 1, tuple(terms)))
    return FuzzyProblem(obj, tuple(cons))


@dataclass
class SvmSolution:
    lam: np.ndarray
    kappas: np.ndarray
    support: tuple
    bias: BiasSet
    ell_star: float
    objective: float
    margins: list = field(repr=False)
    flags: tuple = ()

    def to_json(self):
        return {
            "lambda": self.lam.tolist(),
            "kappas": self.kappas.tolist(),
            "support": list(self.support),
            "bias": self.bias.to_json(),
            "rho_max": self.bias.rho_max,
            "ell_star": self.ell_star,
            "objective": self.objective,
            "margins": self.margins,
            "flags": list(self.flags),
        }


def svm_verify(d, lam, ell, kappas, support, rho_max=1.0, tol=None, n_levels=None):
    """Check the optimality system through the generic gradient machinery.

    Stationarity is evaluated from the gH-gradients of :func:`svm_problem`,
    independently of how λ was produced.
    """
    tol = config.TOL if tol is None else tol
    lam = np.asarray(lam, dtype=float)
    kappas = np.asarray(kappas, dtype=float)
    p = svm_problem(d)
    z = np.concatenate([lam, [ell]])
    gH = grad(p.objective, z)
    gY = [grad(c, z) for c in p.constraints]
    res = stationarity_residuals(gH, gY, 1.0, kappas)
    lv = merge_levels(_grid(d, n_levels), *(r.levels for r in res))
    worst = 0.0
    for r in res:
        lo, hi = endpoints(r, lv)
        worst = max(worst, float(np.max(np.maximum(np.maximum(lo, -hi), 0.0))))
    comp = True
    for i in support:
        y_val = svm_constraint_value(d, lam, ell, i)
        lvi = lv[lv <= rho_max + 1e-12]
        lo, hi = endpoints(y_val, lvi)
        s = tol * (1.0 + float(np.abs(lo).max() + np.abs(hi).max()))
        comp &= bool(np.all(lo <= s) and np.all(hi >= -s))
    off_support = [i for i in range(len(d)) if i not in set(support)]
    return {
        "sum_kappa_y": float(kappas @ d.y),
        "nonnegative": bool(np.all(kappas >= -tol)),
        "support_consistent": bool(np.all(np.abs(kappas[off_support]) <= tol)) if off_support else True,
        "stationarity_worst": worst,
        "stationarity": worst <= tol * (1.0 + float(np.abs(lam).max(initial=0.0))) * 10,
        "complementary": comp,
        "objective": 0.5 * float(lam @ lam),
    }


def _candidate(d, S, cores, tol, n_levels):
    y = d.y
    m = len(S)
    A = np.zeros((m + 1, m + 1))
    rhs = np.zeros(m + 1)
    G = cores[list(S)] @ cores[list(S)].T
    ys = y[list(S)]
    for r in range(m):
        A[r, :m] = ys[r] * ys * G[r]
        A[r, m] = -ys[r]
        rhs[r] = 1.0
    A[m, :m] = ys
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    if np.max(np.abs(A @ sol - rhs)) > 1e-9:
        return None
    k_s = sol[:m]
    if np.any(k_s <= tol):
        return None
    kappa = np.zeros(len(d))
    kappa[list(S)] = k_s
    try:
        lam = svm_stationary_lambda(d, kappa, tol=max(tol, 1e-9), n_levels=n_levels)
        bias = svm_bias_set(d, lam, S, n_levels=n_levels, tol=tol)
    except (EmptyIntersection, EmptyBias):
        return None
    top = bias.top()
    ell = 0.5 * (top.lo + top.hi)
    margins = svm_margin_report(d, lam, ell, n_levels=n_levels)
    if any(r["core_margin"] < 1.0 - tol * (1.0 + abs(r["core_margin"])) for r in margins):
        return None
    check = svm_verify(d, lam, ell, kappa, S, bias.rho_max, tol=tol, n_levels=n_levels)
    if not check["complementary"]:
        return None
    return SvmSolution(lam, kappa, tuple(S), bias, float(ell), 0.5 * float(lam @ lam), margins)


def support_candidates(d, max_support=MAX_SUPPORT):
    labels = d.labels
    for size in range(2, min(max_support, len(d)) + 1):
        for S in itertools.combinations(range(len(d)), size):
            if len({labels[i] for i in S}) == 2:
                yield S


def svm_solve(d, max_support=MAX_SUPPORT, n_levels=None, tol=None, threads=1):
    """Enumerate support sets, keep accepted candidates, return the smallest ``½‖λ‖²``.

    For a support set S the multipliers solve the core margin equalities
    ``y_i(Σ_k κ_k y_k c_kᵀc_i - ℓ) = 1`` (i in S) together with
    ``Σ κ_k y_k = 0``; only strictly positive solutions are kept. Ties on the
    objective go to the lexicographically smaller S.
    """
    tol = config.TOL if tol is None else tol
    if len(set(d.labels)) < 2:
        raise PreconditionError("both labels must be present")
    cores = d.cores()
    flags = () if d.has_point_cores() else ("non-point cores: lambda uses core midpoints",)
    cands = list(support_candidates(d, max_support))
    work = lambda S: _candidate(d, S, cores, tol, n_levels)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, cands))
    else:
        results = [work(S) for S in cands]
    best = None
    for sol in results:
        if sol is None:
            continue
        if best is None or sol.objective < best.objective - 1e-12 or (
                abs(sol.objective - best.objective) <= 1e-12 and sol.support < best.support):
            best = sol
    if best is None:
        raise NoSeparator(f"no support set of size <= {max_support} gives an accepted separator")
    best.flags = flags
    return best
