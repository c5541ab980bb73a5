"""Bundled worked examples re-run against their stored expected values."""
from dataclasses import dataclass
from importlib import resources
import json

import numpy as np

from fuzzopt.calculus import evaluate, expr_from_json, grad
from fuzzopt.cones import Box, intersection_empty_sampled
from fuzzopt.core import check_grid, distance, endpoints, number_from_json
from fuzzopt.optimality import (
    FuzzyProblem, active_set, fritz_john_find, fritz_john_verify, kkt_find, kkt_verify,
)
from fuzzopt.svm import FuzzyDataset, svm_bias_set, svm_solve, svm_stationary_lambda, svm_verify

EXAMPLES = ("box_cones", "fj_1d", "kkt_2d", "svm_6pt")


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""

    def line(self):
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}" + (f" ({self.detail})" if self.detail else "")


def load_fixture(name):
    return json.loads(resources.files("fuzzopt").joinpath("data", name).read_text(encoding="utf-8"))


def expected(example_id):
    return load_fixture("expected.json")[example_id]


def affine_error(f, shape, levels=None):
    """Max deviation of ``f`` from ``lo = a + bρ, hi = c + dρ`` on its check grid."""
    (a, b), (c, d) = shape
    lv = check_grid(f, levels=levels)
    lo, hi = endpoints(f, lv)
    return float(max(np.abs(lo - (a + b * lv)).max(), np.abs(hi - (c + d * lv)).max()))


def _affine_checks(prefix, parts, shapes, tol):
    out = []
    for i, (f, shape) in enumerate(zip(parts, shapes)):
        err = affine_error(f, shape)
        out.append(Check(f"{prefix}[{i}]", err <= tol, f"max error {err:.2e}"))
    return out


def _box_cones(exp):
    fx = load_fixture(exp["fixture"])
    e = expr_from_json(fx["objective"])
    box = Box(fx["box"]["lo"], fx["box"]["hi"])
    g = grad(e, exp["optimal_point"])
    checks = _affine_checks("gradient at optimum", g.partials, [exp["grad_d1"], exp["grad_d2"]], exp["tol"])
    r1 = intersection_empty_sampled(e, box, exp["optimal_point"], trials=exp["trials"])
    checks.append(Check("no common direction at optimum", r1.empty_suspected, f"{r1.trials} trials"))
    r2 = intersection_empty_sampled(e, box, exp["boundary_point"], trials=exp["trials"])
    found = (not r2.empty_suspected) and r2.trial_index < exp["counterexample_within"]
    detail = "none" if r2.empty_suspected else f"trial {r2.trial_index}, tau={np.round(r2.counterexample, 4).tolist()}"
    checks.append(Check("common direction at boundary point", found, detail))
    if found:
        checks.append(Check("counterexample has tau2 < 0", bool(r2.counterexample[1] < 0)))
    return checks


def _constrained(exp, fj_residual_key=None, kkt_residual_key=None):
    p = FuzzyProblem.from_json(load_fixture(exp["fixture"]))
    x = np.asarray(exp["point"], dtype=float)
    tol = exp["tol"]
    act = active_set(p, x)
    checks = [Check("active set", list(act) == exp["active_set"], f"{list(act)}")]
    inactive = [j for j in range(len(p.constraints)) if j not in act]
    dist = distance(evaluate(p.constraints[inactive[0]], x), number_from_json(exp["inactive_value"]))
    checks.append(Check("inactive constraint value", dist <= tol, f"distance {dist:.2e}"))
    checks += _affine_checks("objective gradient", grad(p.objective, x).partials, exp["grad_objective"], tol)
    checks += _affine_checks("active gradient", grad(p.constraints[act[0]], x).partials, exp["grad_active"], tol)
    k0, *ks = exp["fj_multipliers"]
    rep = fritz_john_verify(p, x, k0, ks)
    checks.append(Check(f"Fritz-John verify {exp['fj_multipliers']}", rep.passed, f"worst residual {rep.worst_residual:.2e}"))
    if fj_residual_key:
        checks += _affine_checks("Fritz-John residual", rep.residuals, exp[fj_residual_key], tol)
    cert = fritz_john_find(p, x)
    again = fritz_john_verify(p, x, cert.kappa0, cert.kappas)
    checks.append(Check("Fritz-John find round-trip", again.passed,
                        f"kappa={np.round(np.r_[cert.kappa0, cert.kappas], 6).tolist()}"))
    if "fj_normalized" in exp:
        err = float(np.abs(np.r_[cert.kappa0, cert.kappas] - exp["fj_normalized"]).max())
        checks.append(Check("Fritz-John find matches normalised multipliers", err <= tol, f"max error {err:.2e}"))
    krep = kkt_verify(p, x, exp["kkt_multipliers"])
    checks.append(Check(f"KKT verify {exp['kkt_multipliers']}", krep.passed, f"worst residual {krep.worst_residual:.2e}"))
    if kkt_residual_key:
        checks += _affine_checks("KKT residual", krep.residuals, exp[kkt_residual_key], tol)
    kc = kkt_find(p, x)
    checks.append(Check("KKT find round-trip", kkt_verify(p, x, kc.kappas).passed,
                        f"kappa={np.round(kc.kappas, 6).tolist()}"))
    return checks


def _svm(exp):
    d = FuzzyDataset.from_json(load_fixture(exp["fixture"]))
    tol = exp["tol"]
    lam = np.asarray(exp["lambda"], dtype=float)
    bias = svm_bias_set(d, lam, exp["support"])
    below = bias.levels <= bias.rho_max
    (a, b), (c, e) = exp["bias"]
    lv = bias.levels[below]
    err = float(max(np.abs(bias.lo[below] - (a + b * lv)).max(), np.abs(bias.hi[below] - (c + e * lv)).max()))
    checks = [
        Check("bias set", err <= tol, f"max error {err:.2e}"),
        Check("rho_max", abs(bias.rho_max - exp["rho_max"]) <= tol, f"{bias.rho_max!r}"),
        Check("objective", abs(0.5 * lam @ lam - exp["objective"]) <= tol, f"{float(0.5 * lam @ lam)!r}"),
    ]
    st = svm_stationary_lambda(d, exp["stationary_kappa"])
    checks.append(Check("stationary lambda", np.allclose(st, exp["stationary_lambda"], atol=tol, rtol=0), f"{st.tolist()}"))
    sol = svm_solve(d)
    rep = svm_verify(d, sol.lam, sol.ell_star, sol.kappas, sol.support, sol.bias.rho_max)
    checks.append(Check("solver sum kappa*y = 0", abs(rep["sum_kappa_y"]) <= tol, f"{rep['sum_kappa_y']:.2e}"))
    checks.append(Check("solver stationarity", rep["stationarity"], f"worst {rep['stationarity_worst']:.2e}"))
    checks.append(Check("solver complementary slackness", rep["complementary"]))
    worst = min(r["core_margin"] for r in sol.margins)
    checks.append(Check("solver core margins >= 1", worst >= 1 - tol, f"min {worst:.6g}"))
    checks.append(Check("solver objective <= reference objective", sol.objective <= exp["objective"] + tol,
                        f"{sol.objective:.6g}"))
    return checks


def run(example_id):
    if example_id not in EXAMPLES:
        raise KeyError(f"unknown example {example_id!r}; choose from {', '.join(EXAMPLES)}")
    exp = expected(example_id)
    if example_id == "box_cones":
        return _box_cones(exp)
    if example_id == "fj_1d":
        return _constrained(exp, fj_residual_key="fj_residual")
    if example_id == "kkt_2d":
        return _constrained(exp, kkt_residual_key="kkt_residual")
    return _svm(exp)
