import json

import numpy as np
import pytest

from fuzzopt.calculus import FuzzyExpr, Term, expr_from_json, grad
from fuzzopt.core import FuzzyNumber
from fuzzopt.gordan import Verdict, gordan_matrix_decide
from fuzzopt.optimality import (
    FuzzyProblem, InfeasiblePoint, NoCertificate, active_set, first_order_unconstrained_check,
    fritz_john_find, fritz_john_verify, gradient_matrix, kkt_find, kkt_sufficiency_report, kkt_verify,
    linear_independence_check,
)
from fuzzopt.reproduce import affine_error, load_fixture

T = FuzzyNumber.tri
C = FuzzyNumber.crisp


@pytest.fixture(scope="module")
def fj():
    return FuzzyProblem.from_json(load_fixture("fj_example.json"))


@pytest.fixture(scope="module")
def kkt():
    return FuzzyProblem.from_json(load_fixture("kkt_example.json"))


@pytest.fixture(scope="module")
def crisp():
    # min x^2 subject to x - 1 <= 0
    obj = FuzzyExpr(1, (Term(C(1.0), (2,)),))
    con = FuzzyExpr(1, (Term(C(1.0), (1,)),), gh_const=C(1.0))
    return FuzzyProblem(obj, (con,))


def test_active_sets(fj, kkt):
    assert active_set(fj, [2.0]) == (0,)
    assert active_set(kkt, [0.0, 2.0]) == (0,)
    assert active_set(FuzzyProblem(fj.objective, ()), [2.0]) == ()


def test_inactive_constraint_values(fj, kkt):
    from fuzzopt.calculus import evaluate
    assert affine_error(evaluate(fj.constraints[1], [2.0]), [[-8, 1], [-6, -1]]) <= 1e-12
    assert affine_error(evaluate(kkt.constraints[1], [0.0, 2.0]), [[-14, 1], [-10, -3]]) <= 1e-12


def test_infeasible_point_names_constraint(fj):
    with pytest.raises(InfeasiblePoint) as exc:
        active_set(fj, [10.0])
    assert exc.value.constraint in (0, 1)


def test_fritz_john_find_examples(fj, kkt):
    c = fritz_john_find(fj, [2.0])
    assert np.r_[c.kappa0, c.kappas] == pytest.approx(np.array([5, 8, 0]) / 13, abs=1e-9)
    c = fritz_john_find(kkt, [0.0, 2.0])
    assert np.r_[c.kappa0, c.kappas] == pytest.approx(np.array([2.5, 1, 0]) / 3.5, abs=1e-9)
    assert c.active_set == (0,)


def test_fritz_john_crisp_interior(crisp):
    c = fritz_john_find(crisp, [0.0])
    assert c.kappa0 == pytest.approx(1.0) and c.kappas == pytest.approx([0.0])


def test_fritz_john_verify_examples(fj, kkt):
    r = fritz_john_verify(fj, [2.0], 5, [8, 0])
    assert r.passed
    assert affine_error(r.residuals[0], [[-112, 112], [91, -91]]) <= 1e-9
    assert not fritz_john_verify(fj, [2.0], 0, [0, 0]).passed
    assert not fritz_john_verify(fj, [2.0], 0, [0, 0]).nontrivial
    r = fritz_john_verify(kkt, [0.0, 2.0], 1, [0.4, 0])
    assert r.passed
    assert affine_error(r.residuals[0], [[-0.8, 0.8], [1.2, -1.2]]) <= 1e-9
    assert affine_error(r.residuals[1], [[-9.4, 9.4], [21.8, -21.8]]) <= 1e-9


def test_fritz_john_verify_failures(fj):
    assert not fritz_john_verify(fj, [2.0], 5, [-8, 0]).nonnegative
    # multiplier on the slack constraint breaks complementary slackness
    assert not fritz_john_verify(fj, [2.0], 5, [8, 1]).complementary
    assert not fritz_john_verify(fj, [2.0], 1, [0, 0]).stationarity


def test_kkt_examples(fj, kkt, crisp):
    assert kkt_verify(kkt, [0.0, 2.0], [0.4, 0]).passed
    c = kkt_find(fj, [2.0])
    assert c.kappa0 == 1.0 and c.kappas == pytest.approx([1.6, 0.0], abs=1e-9)
    r = kkt_verify(fj, [2.0], [1.6, 0])
    assert affine_error(r.residuals[0], [[-22.4, 22.4], [18.2, -18.2]]) <= 1e-9
    c = kkt_find(kkt, [0.0, 2.0])
    assert kkt_verify(kkt, [0.0, 2.0], c.kappas).passed
    unc = FuzzyProblem(crisp.objective, ())
    c = kkt_find(unc, [0.0])
    assert c.kappas.size == 0 and kkt_verify(unc, [0.0], []).passed


def test_kkt_admissible_interval_contains_reference_value(kkt):
    # the first coordinate pins kappa1 at the core; any admissible value must verify there
    ok = [k for k in np.linspace(0, 2, 201) if kkt_verify(kkt, [0.0, 2.0], [k, 0]).passed]
    assert ok and min(ok) <= 0.4 <= max(ok)


def test_no_certificate_at_non_stationary_point():
    obj = FuzzyExpr(1, (Term(T(1, 2, 3), (1,)),))
    p = FuzzyProblem(obj, ())
    with pytest.raises(NoCertificate):
        kkt_find(p, [1.0])
    with pytest.raises(NoCertificate):
        fritz_john_find(p, [1.0])


def test_round_trip_random_points(fj, kkt):
    rng = np.random.default_rng(8)
    for p, x in ((fj, [2.0]), (kkt, [0.0, 2.0])):
        for find, verify in ((fritz_john_find, fritz_john_verify), (kkt_find, None)):
            c = find(p, x)
            if verify is None:
                assert kkt_verify(p, x, c.kappas, tol=1e-8).passed
            else:
                assert verify(p, x, c.kappa0, c.kappas, tol=1e-8).passed
            for j, k in enumerate(c.kappas):
                if k > 1e-12:
                    assert j in c.active_set
    # random crisp-coefficient problems at their unconstrained stationary point
    for _ in range(20):
        a, b = rng.uniform(0.5, 3), rng.uniform(-2, 2)
        obj = FuzzyExpr(1, (Term(C(a), (2,)), Term(C(b), (1,))))
        x = [-b / (2 * a)]
        c = fritz_john_find(FuzzyProblem(obj, ()), x)
        assert c.kappa0 == pytest.approx(1.0)


@pytest.mark.parametrize("c", [2, 10])
def test_fritz_john_scaling(fj, kkt, c):
    assert fritz_john_verify(fj, [2.0], 5 * c, [8 * c, 0]).passed
    assert fritz_john_verify(kkt, [0.0, 2.0], 2.5 * c, [1 * c, 0]).passed
    cert = fritz_john_find(fj, [2.0])
    assert fritz_john_verify(fj, [2.0], c * cert.kappa0, c * cert.kappas).passed


def test_breakpoints_agree_with_dense_grid(fj, kkt):
    rng = np.random.default_rng(3)
    for p, x in ((fj, [2.0]), (kkt, [0.0, 2.0])):
        for _ in range(40):
            k = rng.uniform(0, 10, 1 + len(p.constraints))
            k[2] = 0.0
            if rng.random() < 0.3:
                k = np.array([5.0, 8.0, 0.0]) if len(x) == 1 else np.array([2.5, 1.0, 0.0])
            coarse = fritz_john_verify(p, x, k[0], k[1:], n_levels=2)
            fine = fritz_john_verify(p, x, k[0], k[1:], n_levels=101)
            assert coarse.passed == fine.passed


def test_consistency_with_gordan(fj, kkt, crisp):
    for p, x in ((fj, [2.0]), (kkt, [0.0, 2.0]), (crisp, [0.0]), (crisp, [-0.5])):
        try:
            fritz_john_find(p, x)
            found = True
        except NoCertificate:
            found = False
        v = gordan_matrix_decide(gradient_matrix(p, x))
        assert found == (v.which is not Verdict.ALT_I)


def test_linear_independence():
    assert linear_independence_check([(T(1, 2, 3),)]).independent
    rep = linear_independence_check([(C(0.0),)])
    assert not rep.independent and rep.theta == pytest.approx([1.0])


def test_linear_independence_active_gradient(kkt):
    g = grad(kkt.constraints[0], [0.0, 2.0])
    assert g.partials[1].core.lo == g.partials[1].core.hi == -5.0
    assert linear_independence_check([tuple(g.partials)]).independent


def test_linear_independence_pairs():
    u = (T(1, 2, 3), T(-1, 0, 1))
    w = (T(-3, -2, -1), T(-1, 0, 1))
    rep = linear_independence_check([u, w])
    assert not rep.independent
    assert rep.theta[0] * rep.theta[1] > 0  # equal positive weights cancel the cores
    crisp_u = (C(1.0), C(0.0))
    crisp_w = (C(0.0), C(1.0))
    assert linear_independence_check([crisp_u, crisp_w]).independent
    with pytest.raises(ValueError):
        linear_independence_check([(C(1.0),)] * 9)


def test_first_order_check():
    box = expr_from_json(load_fixture("box_example.json")["objective"])
    assert first_order_unconstrained_check(box, [1.5, 0.0]).passed
    r = first_order_unconstrained_check(box, [1.5, 1.0])
    assert not r.passed and r.flags[0].all() and not r.flags[1].any()
    assert first_order_unconstrained_check(FuzzyExpr(1, (Term(C(1.0), (2,)),)), [0.0]).passed


def test_sufficiency_reports(fj, crisp):
    r = kkt_sufficiency_report(crisp, [0.0], [0.0], [(-2, 2)], convexity_trials=300, seed=1)
    assert r["verdict"] == "sufficient-conditions-supported" and r["basis"] == "sampling"
    r = kkt_sufficiency_report(fj, [2.0], [1.6, 0.0], [(0.5, 3.0)], convexity_trials=300, seed=1)
    assert r["kkt"].passed and not r["convexity"]["objective"].ok
    assert r["verdict"] == "not supported"
    r = kkt_sufficiency_report(crisp, [-0.5], [0.0], [(-2, 2)], convexity_trials=300, seed=1)
    assert not r["kkt"].passed and r["verdict"] == "not supported"


def test_problem_and_report_json(fj):
    again = FuzzyProblem.from_json(json.loads(json.dumps(fj.to_json())))
    assert again.to_json() == fj.to_json()
    cert = fritz_john_find(fj, [2.0])
    j = cert.to_json()
    assert j["active_set"] == [0] and len(j["residuals"]) == 1
    rep = fritz_john_verify(fj, [2.0], 5, [8, 0]).to_json()
    assert rep["passed"] and rep["worst_residual"] >= 0
    json.dumps(j)
    json.dumps(rep)
