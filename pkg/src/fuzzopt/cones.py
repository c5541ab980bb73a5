"""Descent and feasible-direction cones, and the sampled emptiness check."""
from dataclasses import dataclass

import numpy as np

from fuzzopt import _kernels, config
from fuzzopt.calculus import directional, grad
from fuzzopt.core import compare, merge_levels, uniform_grid
from fuzzopt.optimality import active_indices

DEFAULT_TRIALS = 10_000


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float).ravel()
        hi = np.asarray(self.hi, dtype=float).ravel()
        if lo.shape != hi.shape:
            raise ValueError("box bounds differ in length")
        if np.any(lo > hi):
            raise ValueError("box needs lo <= hi componentwise")
        object.__setattr__(self, "lo", tuple(lo))
        object.__setattr__(self, "hi", tuple(hi))

    @property
    def dim(self):
        return len(self.lo)


@dataclass(frozen=True)
class FuzzyConstrained:
    constraints: tuple

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))


def _vec(v, n, what):
    v = np.atleast_1d(np.asarray(v, dtype=float)).ravel()
    if v.shape != (n,):
        raise ValueError(f"{what} has length {v.size}, expected {n}")
    return v


def in_descent_cone(e, x, tau):
    tau = _vec(tau, e.dim, "direction")
    if not np.any(tau):
        return False
    return compare(directional(e, x, tau), 0.0).strict_all


def _box_faces(box, x, tol):
    lo, hi = np.asarray(box.lo), np.asarray(box.hi)
    x = _vec(x, box.dim, "point")
    if np.any(x < lo - tol) or np.any(x > hi + tol):
        raise ValueError(f"point {x.tolist()} lies outside the box")
    return np.abs(x - lo) <= tol, np.abs(x - hi) <= tol


def in_feasible_cone_box(box, x, tau, tol=1e-12):
    at_lo, at_hi = _box_faces(box, x, tol)
    tau = _vec(tau, box.dim, "direction")
    if not np.any(tau):
        return False
    return bool(np.all(tau[at_lo] >= 0) and np.all(tau[at_hi] <= 0))


def in_linearized_feasible_cone(constraints, x, tau, tol_active=None):
    """Every active constraint has a strictly negative directional derivative."""
    constraints = tuple(constraints)
    if not constraints:
        raise ValueError("no constraints given")
    n = constraints[0].dim
    x = _vec(x, n, "point")
    tau = _vec(tau, n, "direction")
    if not np.any(tau):
        return False
    act = active_indices(constraints, x, tol=tol_active)
    return all(compare(directional(constraints[j], x, tau), 0.0).strict_all for j in act)


@dataclass
class EmptinessReport:
    empty_suspected: bool
    trials: int
    counterexample: np.ndarray = None
    trial_index: int = None

    def to_json(self):
        out = {"empty_suspected": self.empty_suspected, "trials": self.trials}
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample.tolist()
            out["trial_index"] = self.trial_index
        return out


def _strictly_negative(taus, g, levels):
    lo, hi = g.endpoint_table(levels)
    _, d_hi = _kernels.interval_dot_batch(taus, lo, hi)
    return np.all(d_hi < 0, axis=1)


def sample_directions(n, trials, seed=None):
    """Uniform unit directions from normalised Gaussians."""
    rng = np.random.default_rng(config.SEED if seed is None else seed)
    z = rng.standard_normal((trials, n))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def intersection_empty_sampled(e, feasible, x, trials=DEFAULT_TRIALS, seed=None, n_levels=None,
                               tol_active=None):
    """Look for a direction in both the descent cone and the feasible cone.

    ``feasible`` is a :class:`Box`, a :class:`FuzzyConstrained`, or ``None``
    (unconstrained). Finding one proves ``x`` is not optimal; finding none is
    only evidence.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    x = _vec(x, e.dim, "point")
    taus = sample_directions(e.dim, trials, seed)
    g = grad(e, x)
    lv = merge_levels(uniform_grid(n_levels), *(d.levels for d in g.partials))
    ok = _strictly_negative(taus, g, lv)
    if isinstance(feasible, Box):
        at_lo, at_hi = _box_faces(feasible, x, 1e-12)
        ok &= np.all(taus[:, at_lo] >= 0, axis=1) & np.all(taus[:, at_hi] <= 0, axis=1)
    elif isinstance(feasible, FuzzyConstrained):
        cons = feasible.constraints
        for j in active_indices(cons, x, tol=tol_active, n_levels=n_levels):
            gj = grad(cons[j], x)
            lvj = merge_levels(lv, *(d.levels for d in gj.partials))
            ok &= _strictly_negative(taus, gj, lvj)
    elif feasible is not None:
        raise TypeError(f"unsupported feasible set {type(feasible).__name__}")
    hits = np.flatnonzero(ok)
    if hits.size == 0:
        return EmptinessReport(True, trials)
    k = int(hits[0])
    return EmptinessReport(False, trials, taus[k], k)
