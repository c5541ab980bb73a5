"""Fuzzy numbers as families of closed-interval level cuts.

Every value here is piecewise linear in the membership level: parametric
shapes are affine on [0, 1] and sampled shapes interpolate linearly between
their knots. Binary operations therefore evaluate both operands on the union
of their knots, which keeps the results exact.
"""
from dataclasses import dataclass
import io
import numbers

import numpy as np

from fuzzopt import config

_KNOT_EPS = 1e-12


class NotAFuzzyNumber(ValueError):
    """A level-wise family whose cuts are not nested."""


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not lo <= hi:
            raise ValueError(f"interval endpoints out of order: [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __contains__(self, v):
        return self.lo <= v <= self.hi

    @property
    def width(self):
        return self.hi - self.lo

    def __iter__(self):
        yield self.lo
        yield self.hi


# ---------------------------------------------------------------------------
# level grids
# ---------------------------------------------------------------------------

def uniform_grid(n_levels=None):
    n = config.GRID_LEVELS if n_levels is None else int(n_levels)
    if n < 2:
        raise ValueError("a level grid needs at least two levels")
    # i / (n - 1) hits 0.1, 0.6, ... as the nearest doubles, unlike linspace
    return np.arange(n) / (n - 1)


def merge_levels(*arrays):
    """Sorted union of level arrays, collapsing knots closer than 1e-12."""
    parts = [np.atleast_1d(np.asarray(a, dtype=float)) for a in arrays if a is not None]
    if not parts:
        return np.array([0.0, 1.0])
    lv = np.unique(np.concatenate(parts))
    if lv.size > 1:
        keep = np.concatenate([[True], np.diff(lv) > _KNOT_EPS])
        top = lv[-1]
        lv = lv[keep]
        # a cluster touching the top level is represented by the top level itself
        lv[-1] = top
    return lv


def validate_grid(levels):
    lv = np.asarray(levels, dtype=float)
    if lv.ndim != 1 or lv.size < 2:
        raise ValueError("level grid must be a 1-d sequence of at least two levels")
    if lv[0] != 0.0 or lv[-1] != 1.0:
        raise ValueError("level grid must start at 0 and end at 1")
    if np.any(np.diff(lv) <= 0):
        raise ValueError("level grid must be strictly increasing")
    return lv


def check_grid(*objs, n_levels=None, levels=None):
    """Levels used for checks: the uniform grid plus every operand's knots."""
    base = uniform_grid(n_levels) if levels is None else np.asarray(levels, dtype=float)
    return merge_levels(base, *(knots(o) for o in objs))


# ---------------------------------------------------------------------------
# fuzzy numbers and cut families
# ---------------------------------------------------------------------------

class FuzzyNumber:
    """A normal fuzzy number with nested, piecewise-linear level cuts.

    Build with :meth:`tri`, :meth:`trap`, :meth:`crisp` or :meth:`sampled`.
    """

    __slots__ = ("kind", "params", "levels", "lo", "hi")

    def __init__(self, kind, params, levels, lo, hi):
        self.kind = kind
        self.params = params
        self.levels = levels
        self.lo = lo
        self.hi = hi

    @classmethod
    def tri(cls, a, b, c):
        a, b, c = float(a), float(b), float(c)
        if not a <= b <= c:
            raise ValueError(f"triangular number needs a <= b <= c, got ({a}, {b}, {c})")
        return cls("tri", (a, b, c), np.array([0.0, 1.0]), np.array([a, b]), np.array([c, b]))

    @classmethod
    def trap(cls, a, b, c, d):
        a, b, c, d = float(a), float(b), float(c), float(d)
        if not a <= b <= c <= d:
            raise ValueError(f"trapezoidal number needs a <= b <= c <= d, got ({a}, {b}, {c}, {d})")
        return cls("trap", (a, b, c, d), np.array([0.0, 1.0]), np.array([a, b]), np.array([d, c]))

    @classmethod
    def crisp(cls, v):
        return cls.tri(v, v, v)

    @classmethod
    def sampled(cls, levels, cuts=None, lo=None, hi=None, tol=0.0):
        lv = validate_grid(levels)
        if cuts is not None:
            arr = np.asarray(cuts, dtype=float).reshape(-1, 2)
            lo, hi = arr[:, 0], arr[:, 1]
        lo = np.asarray(lo, dtype=float).copy()
        hi = np.asarray(hi, dtype=float).copy()
        if lo.shape != lv.shape or hi.shape != lv.shape:
            raise ValueError("one cut per level is required")
        if np.any(lo > hi + tol):
            raise ValueError("cut endpoints out of order")
        if np.any(np.diff(lo) < -tol) or np.any(np.diff(hi) > tol):
            raise NotAFuzzyNumber("cuts are not nested")
        lo = np.maximum.accumulate(lo)
        hi = np.minimum.accumulate(hi)
        if lo[-1] > hi[-1]:
            mid = 0.5 * (lo[-1] + hi[-1])
            lo = np.minimum(lo, mid)
            hi = np.maximum(hi, mid)
        return cls("sampled", None, lv, lo, hi)

    # -- evaluation --------------------------------------------------------
    def endpoints(self, levels):
        rho = np.asarray(levels, dtype=float)
        if self.kind == "tri":
            a, b, c = self.params
            return a + (b - a) * rho, c - (c - b) * rho
        if self.kind == "trap":
            a, b, c, d = self.params
            return a + (b - a) * rho, d - (d - c) * rho
        return np.interp(rho, self.levels, self.lo), np.interp(rho, self.levels, self.hi)

    def cut(self, rho):
        return cut(self, rho)

    @property
    def core(self):
        lo, hi = self.endpoints(1.0)
        return Interval(lo, hi)

    @property
    def support(self):
        lo, hi = self.endpoints(0.0)
        return Interval(lo, hi)

    # -- arithmetic sugar --------------------------------------------------
    def __add__(self, other):
        if isinstance(other, numbers.Real):
            other = FuzzyNumber.crisp(other)
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, t):
        if not isinstance(t, numbers.Real):
            return NotImplemented
        return scalar_mul(t, self)

    __rmul__ = __mul__

    def __neg__(self):
        return scalar_mul(-1.0, self)

    def __repr__(self):
        if self.kind in ("tri", "trap"):
            return f"{self.kind}{tuple(_short(p) for p in self.params)}"
        return f"sampled(levels={self.levels.size}, core=[{_short(self.lo[-1])}, {_short(self.hi[-1])}])"

    def to_json(self):
        return number_to_json(self)


class CutFamily:
    """Level-wise intervals with no nestedness requirement."""

    __slots__ = ("levels", "lo", "hi")

    def __init__(self, levels, lo, hi):
        lv = validate_grid(levels)
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if lo.shape != lv.shape or hi.shape != lv.shape:
            raise ValueError("one interval per level is required")
        if np.any(lo > hi):
            raise ValueError("cut endpoints out of order")
        self.levels = lv
        self.lo = lo
        self.hi = hi

    @classmethod
    def from_cuts(cls, levels, cuts):
        arr = np.asarray(cuts, dtype=float).reshape(-1, 2)
        return cls(levels, arr[:, 0], arr[:, 1])

    def endpoints(self, levels):
        rho = np.asarray(levels, dtype=float)
        return np.interp(rho, self.levels, self.lo), np.interp(rho, self.levels, self.hi)

    def cut(self, rho):
        return cut(self, rho)

    def is_nested(self, tol=0.0):
        return bool(np.all(np.diff(self.lo) >= -tol) and np.all(np.diff(self.hi) <= tol))

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, t):
        if not isinstance(t, numbers.Real):
            return NotImplemented
        return scalar_mul(t, self)

    __rmul__ = __mul__

    def __neg__(self):
        return scalar_mul(-1.0, self)

    def __repr__(self):
        return f"CutFamily(levels={self.levels.size}, rho0=[{_short(self.lo[0])}, {_short(self.hi[0])}], rho1=[{_short(self.lo[-1])}, {_short(self.hi[-1])}])"

    def to_json(self):
        return {"levels": self.levels.tolist(), "cuts": np.column_stack([self.lo, self.hi]).tolist()}


ZERO = FuzzyNumber.crisp(0.0)


def _short(v):
    return float(f"{v:.12g}")


def _as_operand(m):
    if isinstance(m, (FuzzyNumber, CutFamily)):
        return m
    if isinstance(m, numbers.Real):
        return FuzzyNumber.crisp(m)
    if isinstance(m, Interval):
        return FuzzyNumber.trap(m.lo, m.lo, m.hi, m.hi)
    raise TypeError(f"not a fuzzy operand: {m!r}")


def knots(m):
    m = _as_operand(m)
    return m.levels


def endpoints(m, levels):
    """Lower and upper endpoint arrays of ``m`` at ``levels``."""
    return _as_operand(m).endpoints(levels)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def cut(m, rho):
    """The level-``rho`` cut of ``m`` as an :class:`Interval`."""
    rho = float(rho)
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"level {rho} outside [0, 1]")
    lo, hi = _as_operand(m).endpoints(rho)
    return Interval(float(lo), float(hi))


def _trap_params(m):
    if m.kind == "tri":
        a, b, c = m.params
        return a, b, b, c
    return m.params


def add(m, l):
    """Level-wise endpoint sum."""
    m, l = _as_operand(m), _as_operand(l)
    if isinstance(m, FuzzyNumber) and isinstance(l, FuzzyNumber):
        if m.kind == "tri" and l.kind == "tri":
            return FuzzyNumber.tri(*(p + q for p, q in zip(m.params, l.params)))
        if m.kind in ("tri", "trap") and l.kind in ("tri", "trap"):
            return FuzzyNumber.trap(*(p + q for p, q in zip(_trap_params(m), _trap_params(l))))
        lv = merge_levels(m.levels, l.levels)
        ml, mh = m.endpoints(lv)
        ll, lh = l.endpoints(lv)
        return FuzzyNumber.sampled(lv, lo=ml + ll, hi=mh + lh, tol=1e-12)
    lv = merge_levels(m.levels, l.levels)
    ml, mh = m.endpoints(lv)
    ll, lh = l.endpoints(lv)
    return CutFamily(lv, ml + ll, mh + lh)


def scalar_mul(t, m):
    """``t * m`` with the endpoint min/max rule; ``0 * m`` is crisp zero."""
    t = float(t)
    m = _as_operand(m)
    if isinstance(m, FuzzyNumber):
        if t == 0.0:
            return ZERO
        if m.kind == "tri":
            a, b, c = (t * p for p in m.params)
            return FuzzyNumber.tri(a, b, c) if t > 0 else FuzzyNumber.tri(c, b, a)
        if m.kind == "trap":
            a, b, c, d = (t * p for p in m.params)
            return FuzzyNumber.trap(a, b, c, d) if t > 0 else FuzzyNumber.trap(d, c, b, a)
        lo, hi = (t * m.lo, t * m.hi) if t > 0 else (t * m.hi, t * m.lo)
        return FuzzyNumber("sampled", None, m.levels, lo, hi)
    a, b = t * m.lo, t * m.hi
    return CutFamily(m.levels, np.minimum(a, b), np.maximum(a, b))


def gh_difference(m, l):
    """Level-wise generalized Hukuhara difference ``m ⊖ l``.

    The result is a :class:`CutFamily` on the union of the operands' knots,
    refined at every level where the lower and upper endpoint differences
    cross, so it is exact between knots as well.
    """
    m, l = _as_operand(m), _as_operand(l)
    lv = merge_levels(m.levels, l.levels)
    ml, mh = m.endpoints(lv)
    ll, lh = l.endpoints(lv)
    d = (ml - ll) - (mh - lh)
    extra = []
    for k in range(lv.size - 1):
        if d[k] * d[k + 1] < 0:
            extra.append(lv[k] + (lv[k + 1] - lv[k]) * d[k] / (d[k] - d[k + 1]))
    if extra:
        lv = merge_levels(lv, extra)
        ml, mh = m.endpoints(lv)
        ll, lh = l.endpoints(lv)
    dlo, dhi = ml - ll, mh - lh
    return CutFamily(lv, np.minimum(dlo, dhi), np.maximum(dlo, dhi))


def _affine(levels, values, tol):
    if levels.size <= 2:
        return True
    pred = values[0] + (values[-1] - values[0]) * levels
    return bool(np.all(np.abs(values - pred) <= tol))


def as_fuzzy_number(f, tol=None):
    """Convert a nested cut family into a :class:`FuzzyNumber`.

    Affine families come back as triangular or trapezoidal numbers.
    Raises :class:`NotAFuzzyNumber` if nestedness fails by more than ``tol``.
    """
    tol = config.TOL if tol is None else tol
    if isinstance(f, FuzzyNumber):
        return f
    if np.any(np.diff(f.lo) < -tol) or np.any(np.diff(f.hi) > tol):
        worst = max(float(np.max(-np.diff(f.lo), initial=0.0)), float(np.max(np.diff(f.hi), initial=0.0)))
        raise NotAFuzzyNumber(f"cut family is not nested (violation {worst:.3g})")
    lv = f.levels
    if _affine(lv, f.lo, tol) and _affine(lv, f.hi, tol):
        a, b, c, d = f.lo[0], f.lo[-1], f.hi[-1], f.hi[0]
        if abs(b - c) <= tol:
            mid = 0.5 * (b + c)
            return FuzzyNumber.tri(min(a, mid), mid, max(d, mid))
        return FuzzyNumber.trap(min(a, b), b, c, max(c, d))
    return FuzzyNumber.sampled(lv, lo=f.lo, hi=f.hi, tol=tol)


def distance(m, l, n_levels=None):
    """Sup over levels of the larger endpoint gap; exact for piecewise-linear data."""
    lv = check_grid(m, l, n_levels=n_levels)
    ml, mh = endpoints(m, lv)
    ll, lh = endpoints(l, lv)
    return float(np.max(np.maximum(np.abs(ml - ll), np.abs(mh - lh))))


@dataclass(frozen=True)
class OrderResult:
    weak_all: bool
    strict_some: bool
    strict_all: bool

    @property
    def preceq(self):
        """Weak everywhere and strict at some endpoint somewhere."""
        return self.weak_all and self.strict_some


def compare(m, l=0.0, tol=None, n_levels=None, levels=None):
    """Order ``m`` against ``l`` endpoint-wise at every check level.

    Weak comparisons allow a slack of ``tol``; strict ones use exact ``<``.
    """
    tol = config.TOL if tol is None else tol
    lv = check_grid(m, l, n_levels=n_levels, levels=levels)
    ml, mh = endpoints(m, lv)
    ll, lh = endpoints(l, lv)
    lo_lt, hi_lt = ml < ll, mh < lh
    return OrderResult(
        weak_all=bool(np.all(ml <= ll + tol) and np.all(mh <= lh + tol)),
        strict_some=bool(np.any(lo_lt | hi_lt)),
        strict_all=bool(np.all(lo_lt & hi_lt)),
    )


def contains_zero(f, mode="all_levels", tol=None, n_levels=None, levels=None):
    tol = config.TOL if tol is None else tol
    lv = check_grid(f, n_levels=n_levels, levels=levels)
    lo, hi = endpoints(f, lv)
    flags = (lo <= tol) & (hi >= -tol)
    if mode == "all_levels":
        return bool(flags.all())
    if mode == "per_level":
        return lv, flags
    raise ValueError(f"unknown mode {mode!r}")


def is_zero(f, tol=None, n_levels=None):
    """Every cut within ``tol`` of [0, 0]."""
    tol = config.TOL if tol is None else tol
    lv = check_grid(f, n_levels=n_levels)
    lo, hi = endpoints(f, lv)
    return bool(np.all(np.abs(lo) <= tol) and np.all(np.abs(hi) <= tol))


def dot(tau, U):
    """``sum_j tau_j * U_j`` level-wise."""
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    if len(U) == 0:
        raise ValueError("empty fuzzy vector")
    if tau.shape != (len(U),):
        raise ValueError(f"dimension mismatch: {tau.size} weights for {len(U)} components")
    acc = ZERO
    for t, m in zip(tau, U):
        acc = add(acc, scalar_mul(t, m))
    return acc


# ---------------------------------------------------------------------------
# vectors and matrices
# ---------------------------------------------------------------------------

def as_fuzzy_vector(items):
    vec = tuple(_as_operand(m) if not isinstance(m, dict) else number_from_json(m) for m in items)
    if not vec:
        raise ValueError("a fuzzy vector needs at least one component")
    return vec


class FuzzyMatrix:
    """An ``s x n`` rectangular grid of fuzzy numbers."""

    def __init__(self, rows):
        rows = tuple(as_fuzzy_vector(r) for r in rows)
        if not rows:
            raise ValueError("a fuzzy matrix needs at least one row")
        n = len(rows[0])
        if any(len(r) != n for r in rows):
            raise ValueError("fuzzy matrix rows differ in length")
        self.entries = rows

    @classmethod
    def from_columns(cls, columns):
        cols = [as_fuzzy_vector(c) for c in columns]
        return cls(list(zip(*cols)))

    @property
    def shape(self):
        return len(self.entries), len(self.entries[0])

    def column(self, j):
        return tuple(r[j] for r in self.entries)

    def endpoint_tables(self, levels):
        """Arrays ``lo, hi`` of shape ``(s, n, L)``."""
        s, n = self.shape
        lo = np.empty((s, n, len(levels)))
        hi = np.empty_like(lo)
        for i, row in enumerate(self.entries):
            for j, m in enumerate(row):
                lo[i, j], hi[i, j] = endpoints(m, levels)
        return lo, hi

    def all_knots(self):
        return merge_levels(*(knots(m) for row in self.entries for m in row))

    def to_json(self):
        return [[number_to_json(m) for m in row] for row in self.entries]


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------

def number_from_json(obj):
    """Decode ``{"tri": [...]}``, ``{"trap": [...]}``, ``{"sampled": {...}}`` or a bare number."""
    if isinstance(obj, numbers.Real) and not isinstance(obj, bool):
        return FuzzyNumber.crisp(obj)
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ValueError(f"cannot decode fuzzy number from {obj!r}")
    (key, val), = obj.items()
    if key == "tri":
        return FuzzyNumber.tri(*val)
    if key == "trap":
        return FuzzyNumber.trap(*val)
    if key == "sampled":
        return FuzzyNumber.sampled(val["levels"], cuts=val["cuts"])
    raise ValueError(f"unknown fuzzy number shape {key!r}")


def number_to_json(m):
    if isinstance(m, CutFamily):
        return m.to_json()
    if m.kind in ("tri", "trap"):
        return {m.kind: list(m.params)}
    return {"sampled": {"levels": m.levels.tolist(), "cuts": np.column_stack([m.lo, m.hi]).tolist()}}


def cut_table(f, levels):
    lv = np.asarray(levels, dtype=float)
    lo, hi = endpoints(f, lv)
    return [(float(r), float(a), float(b)) for r, a, b in zip(lv, lo, hi)]


def cuts_csv(f, levels):
    """CSV text with header ``rho,lo,hi``."""
    buf = io.StringIO()
    buf.write("rho,lo,hi\n")
    for r, a, b in cut_table(f, levels):
        buf.write(f"{r!r},{a!r},{b!r}\n")
    return buf.getvalue()
