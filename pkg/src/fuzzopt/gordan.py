"""Deciders for the fuzzy first and second Gordan alternatives.

For a fuzzy matrix ``M`` (``s x n``) the two alternatives are

I.  some ``y`` in R^s has every component of ``Mᵀy`` strictly below 0̃;
II. some ``x >= 0``, ``x != 0`` puts zero inside every row of ``M_ρ x``
    at every level ρ.

A fuzzy vector ``U`` is the one-column case. Both alternatives are searched
independently; inputs where neither holds are reported as such instead of
being forced into one side.
"""
from dataclasses import dataclass, field
from enum import Enum
import itertools

import numpy as np

from fuzzopt import _kernels, config
from fuzzopt.core import FuzzyMatrix, check_grid, compare, contains_zero, dot, uniform_grid, merge_levels
from fuzzopt.lp import Constraint, LinearProgram, lp_solve, lp_feasible

WITNESS_THRESHOLD = 1e-9


class Verdict(str, Enum):
    ALT_I = "AlternativeI"
    ALT_II = "AlternativeII"
    NEITHER = "NeitherDetected"


@dataclass
class GordanVerdict:
    which: Verdict
    witness_y: np.ndarray = None
    witness_x: np.ndarray = None
    certificate: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "verdict": self.which.value,
            "witness_y": None if self.witness_y is None else self.witness_y.tolist(),
            "witness_x": None if self.witness_x is None else self.witness_x.tolist(),
            "certificate": self.certificate,
        }


def _as_matrix(obj):
    if isinstance(obj, FuzzyMatrix):
        return obj
    return FuzzyMatrix([[m] for m in obj])


def _levels(M, n_levels=None):
    return merge_levels(uniform_grid(n_levels), M.all_knots())


def alternative_one(M, levels=None, threshold=WITNESS_THRESHOLD):
    """Search ``y`` with ``Mᵀy`` strictly negative; returns ``(y or None, bound)``.

    Epigraph LP of ``max_{j,ρ} upper(sum_i y_i m_ij(ρ))`` over ``|y_i| <= 1``,
    with ``y = p - q`` so that ``p_i * hi - q_i * lo`` bounds each term's
    upper endpoint (tight at the optimum).
    """
    M = _as_matrix(M)
    lv = _levels(M) if levels is None else np.asarray(levels, dtype=float)
    lo, hi = M.endpoint_tables(lv)
    s, n = M.shape
    nv = 2 * s + 1
    cons = []
    for j in range(n):
        for k in range(lv.size):
            row = np.zeros(nv)
            row[:s] = hi[:, j, k]
            row[s:2 * s] = -lo[:, j, k]
            row[-1] = -1.0
            cons.append(Constraint(row, "<=", 0.0))
    obj = np.zeros(nv)
    obj[-1] = 1.0
    bounds = [(0.0, 1.0)] * (2 * s) + [(None, None)]
    out = lp_solve(LinearProgram(obj, cons, bounds))
    bound = float(out.value)
    if bound >= -threshold:
        return None, bound
    y = out.point[:s] - out.point[s:2 * s]
    for j in range(n):
        if not compare(dot(y, M.column(j)), 0.0, levels=lv).strict_all:
            return None, bound
    return y, bound


def alternative_two(M, levels=None, tol=None):
    """Search ``x >= 0, sum x = 1`` with zero in every row of ``M_ρ x``.

    Solved at the core level only: cuts are nested and ``x >= 0``, so a
    core-level solution covers every lower level. That claim is re-checked
    on the full grid before returning. Returns ``(x or None, table)``.
    """
    tol = config.TOL if tol is None else tol
    M = _as_matrix(M)
    lv = _levels(M) if levels is None else np.asarray(levels, dtype=float)
    lo, hi = M.endpoint_tables(np.array([1.0]))
    s, n = M.shape
    cons = [Constraint(np.ones(n), "=", 1.0)]
    for i in range(s):
        cons.append(Constraint(lo[i, :, 0], "<=", 0.0))
        cons.append(Constraint(hi[i, :, 0], ">=", 0.0))
    out = lp_feasible(cons, bounds=[(0.0, None)] * n)
    if not out.ok:
        return None, None
    x = out.point
    table = []
    for i, row in enumerate(M.entries):
        comb = dot(x, row)
        flags = contains_zero(comb, mode="per_level", tol=tol, levels=lv)[1]
        if not flags.all():
            raise AssertionError(f"core-level zero membership did not propagate to row {i}")
        lvs = check_grid(comb, levels=lv)
        a, b = comb.endpoints(lvs)
        table.append({"levels": lvs.tolist(), "lo": a.tolist(), "hi": b.tolist()})
    return x, table


def gordan_matrix_decide(M, n_levels=None, tol=None):
    M = _as_matrix(M)
    lv = _levels(M, n_levels)
    y, bound = alternative_one(M, lv)
    x, table = alternative_two(M, lv, tol=tol)
    if y is not None and x is not None:
        raise AssertionError("both alternatives verified; the decider is unsound on this input")
    if y is not None:
        cols = []
        for j in range(M.shape[1]):
            a, b = dot(y, M.column(j)).endpoints(lv)
            cols.append({"lo": a.tolist(), "hi": b.tolist()})
        return GordanVerdict(Verdict.ALT_I, witness_y=y,
                             certificate={"bound": bound, "levels": lv.tolist(), "columns": cols})
    if x is not None:
        return GordanVerdict(Verdict.ALT_II, witness_x=x, certificate={"rows": table})
    return GordanVerdict(Verdict.NEITHER, certificate=_neither_evidence(M, bound))


def _neither_evidence(M, bound):
    lo, hi = M.endpoint_tables(np.array([1.0]))
    failing = []
    for i in range(M.shape[0]):
        if np.all(lo[i, :, 0] > 0) or np.all(hi[i, :, 0] < 0):
            failing.append(i)
    return {"alternative_one_bound": bound, "failing_level": 1.0, "failing_rows": failing}


def gordan_vector_decide(U, n_levels=None, tol=None):
    """First Gordan alternative for a fuzzy vector (the one-column matrix case)."""
    verdict = gordan_matrix_decide(_as_matrix(U), n_levels=n_levels, tol=tol)
    if verdict.which is Verdict.NEITHER:
        verdict.certificate["failing_components"] = verdict.certificate.pop("failing_rows")
    return verdict


def _simplex_grid(n, steps):
    for combo in itertools.product(range(steps + 1), repeat=n):
        if sum(combo) == steps:
            yield np.asarray(combo, dtype=float) / steps


def gordan_exclusivity_oracle(M, levels=None, y_grid=None, x_steps=8, tol=None):
    """Brute-force both alternatives on a finite grid of ``y`` and ``x``.

    Intended for tiny inputs (``s * n <= 6``). Reports whether each
    alternative was found, and flags inputs where both hold or both fail.
    """
    tol = config.TOL if tol is None else tol
    M = _as_matrix(M)
    s, n = M.shape
    if s * n > 6:
        raise ValueError("exclusivity oracle is limited to s * n <= 6")
    lv = _levels(M) if levels is None else np.asarray(levels, dtype=float)
    y_grid = np.linspace(-1.0, 1.0, 9) if y_grid is None else np.asarray(y_grid, dtype=float)
    lo, hi = M.endpoint_tables(lv)
    ys = np.array(list(itertools.product(y_grid, repeat=s)))
    alt1_y = None
    ok = np.ones(len(ys), dtype=bool)
    for j in range(n):
        c_lo, c_hi = _kernels.interval_dot_batch(ys, lo[:, j, :], hi[:, j, :])
        ok &= np.all(c_hi < 0, axis=1) & np.all(c_lo < 0, axis=1)
    if ok.any():
        alt1_y = ys[np.argmax(ok)]
    alt2_x = None
    for x in _simplex_grid(n, x_steps):
        # rows of M_ρ x: sum_j x_j [lo_ij, hi_ij] with x_j >= 0
        r_lo = np.einsum("j,ijk->ik", x, lo)
        r_hi = np.einsum("j,ijk->ik", x, hi)
        if np.all(r_lo <= tol) and np.all(r_hi >= -tol):
            alt2_x = x
            break
    a1, a2 = alt1_y is not None, alt2_x is not None
    return {
        "alternative_one": a1,
        "alternative_two": a2,
        "y": None if alt1_y is None else alt1_y.tolist(),
        "x": None if alt2_x is None else alt2_x.tolist(),
        "both_hold": a1 and a2,
        "both_fail": not a1 and not a2,
    }
