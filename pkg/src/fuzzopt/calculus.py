"""Polynomials with fuzzy coefficients: evaluation, gH-gradients, convexity probes."""
from dataclasses import dataclass, field

import numpy as np

from fuzzopt import config
from fuzzopt.core import (
    FuzzyNumber, ZERO, add, check_grid, compare, dot, endpoints, gh_difference,
    merge_levels, number_from_json, number_to_json, scalar_mul, uniform_grid,
)


@dataclass(frozen=True)
class Term:
    """``coef * prod_i (x_i - shift_i) ** exps_i``."""
    coef: FuzzyNumber
    exps: tuple
    shift: tuple = None

    def __post_init__(self):
        exps = tuple(int(e) for e in self.exps)
        if any(e < 0 for e in exps):
            raise ValueError("monomial exponents must be non-negative")
        object.__setattr__(self, "exps", exps)
        shift = (0.0,) * len(exps) if self.shift is None else tuple(float(s) for s in self.shift)
        if len(shift) != len(exps):
            raise ValueError("shift length must match the exponent length")
        object.__setattr__(self, "shift", shift)

    def value(self, x):
        return float(np.prod((x - self.shift) ** np.asarray(self.exps)))

    def partial(self, x, i):
        e = self.exps[i]
        if e == 0:
            return 0.0
        z = x - self.shift
        rest = np.prod([z[j] ** self.exps[j] for j in range(len(z)) if j != i])
        return float(e * z[i] ** (e - 1) * rest)


@dataclass(frozen=True)
class FuzzyExpr:
    """``(sum_k coef_k * monomial_k(x)) ⊖_gH gh_const``; ``gh_const`` is optional."""
    dim: int
    terms: tuple
    gh_const: FuzzyNumber = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("expression dimension must be positive")
        terms = tuple(self.terms)
        for t in terms:
            if len(t.exps) != self.dim:
                raise ValueError(f"monomial {t.exps} does not have length {self.dim}")
        object.__setattr__(self, "terms", terms)

    def knots(self):
        parts = [t.coef.levels for t in self.terms]
        if self.gh_const is not None:
            parts.append(self.gh_const.levels)
        return merge_levels(*parts)


@dataclass(frozen=True)
class FuzzyGradient:
    partials: tuple

    def __len__(self):
        return len(self.partials)

    def __getitem__(self, i):
        return self.partials[i]

    def endpoint_table(self, levels):
        lo = np.empty((len(self.partials), len(levels)))
        hi = np.empty_like(lo)
        for i, p in enumerate(self.partials):
            lo[i], hi[i] = endpoints(p, levels)
        return lo, hi


def concat(e1, e2):
    """Term-list union of two expressions of the same dimension."""
    if e1.dim != e2.dim:
        raise ValueError("dimension mismatch")
    if e1.gh_const is not None and e2.gh_const is not None:
        raise ValueError("cannot merge two gH-subtracted constants")
    return FuzzyExpr(e1.dim, e1.terms + e2.terms, e1.gh_const if e1.gh_const is not None else e2.gh_const)


def _point(e, x):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (e.dim,):
        raise ValueError(f"expression has dimension {e.dim}, got a point of length {x.size}")
    return x


def evaluate(e, x, rho=None):
    """Value of ``e`` at ``x``: the whole level family, or the cut at ``rho``."""
    x = _point(e, x)
    acc = ZERO
    for t in e.terms:
        acc = add(acc, scalar_mul(t.value(x), t.coef))
    if e.gh_const is not None:
        acc = gh_difference(acc, e.gh_const)
    return acc if rho is None else acc.cut(rho)


def grad(e, x):
    """Term-wise gH-gradient; the gH-subtracted constant contributes nothing."""
    x = _point(e, x)
    parts = []
    for i in range(e.dim):
        acc = ZERO
        for t in e.terms:
            acc = add(acc, scalar_mul(t.partial(x, i), t.coef))
        parts.append(acc)
    return FuzzyGradient(tuple(parts))


def directional(e, x, tau):
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    if tau.shape != (e.dim,):
        raise ValueError("direction length does not match the expression dimension")
    return dot(tau, grad(e, x).partials)


def directional_fd_oracle(e, x, tau, step):
    """``(1/step) * (e(x + step*tau) ⊖_gH e(x))`` level-wise."""
    if step <= 0:
        raise ValueError("step must be positive")
    x = _point(e, x)
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    diff = gh_difference(evaluate(e, x + step * tau), evaluate(e, x))
    return scalar_mul(1.0 / step, diff)


@dataclass
class ConvexityReport:
    trials: int
    passes: int
    strict: int
    counterexample: dict = None

    @property
    def ok(self):
        return self.counterexample is None

    def to_json(self):
        return {"trials": self.trials, "passes": self.passes, "strict": self.strict,
                "counterexample": self.counterexample}


def convexity_sample(e, box, trials=1000, seed=None, tol=None, n_levels=None):
    """Sample the convexity inequality with the weak order on random chords.

    ``box`` is a sequence of ``(lo, hi)`` pairs, one per coordinate. The
    weak order is checked; how often it is also strict somewhere is counted
    separately in ``strict``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    tol = config.TOL if tol is None else tol
    seed = config.SEED if seed is None else seed
    box = np.asarray(box, dtype=float).reshape(e.dim, 2)
    rng = np.random.default_rng(seed)
    lv = merge_levels(uniform_grid(n_levels), e.knots())
    passes = strict = 0
    first = None
    for _ in range(trials):
        x1 = rng.uniform(box[:, 0], box[:, 1])
        x2 = rng.uniform(box[:, 0], box[:, 1])
        theta = rng.uniform(0.0, 1.0)
        left = evaluate(e, theta * x1 + (1 - theta) * x2)
        right = add(scalar_mul(theta, evaluate(e, x1)), scalar_mul(1 - theta, evaluate(e, x2)))
        scale = 1.0 + max(np.abs(endpoints(right, lv)).max(), np.abs(endpoints(left, lv)).max())
        res = compare(left, right, tol=tol * scale, levels=lv)
        if res.weak_all:
            passes += 1
            strict += res.strict_some
        elif first is None:
            first = {"x1": x1.tolist(), "x2": x2.tolist(), "theta": float(theta)}
    return ConvexityReport(trials, passes, strict, first)


@dataclass
class GradientInequalityReport:
    left: object
    right: object
    order: object
    levels: np.ndarray = field(repr=False, default=None)


def gradient_inequality_check(e, x1, x2, tol=None, n_levels=None):
    """Compare ``(x2 - x1)ᵀ∇e(x1)`` against ``e(x2) ⊖_gH e(x1)`` level-wise."""
    x1 = _point(e, x1)
    x2 = _point(e, x2)
    left = directional(e, x1, x2 - x1)
    right = gh_difference(evaluate(e, x2), evaluate(e, x1))
    lv = check_grid(left, right, n_levels=n_levels)
    return GradientInequalityReport(left, right, compare(left, right, tol=tol, levels=lv), lv)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def expr_from_json(obj):
    dim = int(obj["dim"])
    terms = []
    for t in obj["terms"]:
        terms.append(Term(number_from_json(t["coef"]), t["exp"], t.get("shift")))
    gh = obj.get("gh_const")
    return FuzzyExpr(dim, tuple(terms), None if gh is None else number_from_json(gh))


def expr_to_json(e):
    out = {"dim": e.dim, "terms": []}
    for t in e.terms:
        item = {"coef": number_to_json(t.coef), "exp": list(t.exps)}
        if any(s != 0.0 for s in t.shift):
            item["shift"] = list(t.shift)
        out["terms"].append(item)
    if e.gh_const is not None:
        out["gh_const"] = number_to_json(e.gh_const)
    return out
