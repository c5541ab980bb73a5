import json
from importlib import resources

import numpy as np
import pytest

from fuzzopt.calculus import (
    FuzzyExpr, Term, concat, convexity_sample, directional, directional_fd_oracle, evaluate,
    expr_from_json, expr_to_json, grad, gradient_inequality_check,
)
from fuzzopt.core import FuzzyNumber, check_grid, endpoints, is_zero, merge_levels

from oracles import dense, scale_endpoints, tri_endpoints

T = FuzzyNumber.tri


def fixture(name):
    return json.loads(resources.files("fuzzopt").joinpath("data", name).read_text())


@pytest.fixture(scope="module")
def fj():
    d = fixture("fj_example.json")
    return expr_from_json(d["objective"]), [expr_from_json(c) for c in d["constraints"]]


@pytest.fixture(scope="module")
def box_objective():
    return expr_from_json(fixture("box_example.json")["objective"])


def affine_err(f, a, b, c, d, levels=None):
    lv = merge_levels(check_grid(f), dense(101)) if levels is None else levels
    lo, hi = endpoints(f, lv)
    return max(np.abs(lo - (a + b * lv)).max(), np.abs(hi - (c + d * lv)).max())


def random_expr(rng, dim, n_terms, max_exp=3):
    terms = []
    for _ in range(n_terms):
        coef = T(*np.sort(rng.uniform(-3, 3, 3)))
        exps = rng.integers(0, max_exp + 1, dim)
        terms.append(Term(coef, tuple(int(e) for e in exps)))
    return FuzzyExpr(dim, tuple(terms))


# -- evaluation -----------------------------------------------------------------

def test_eval_objective_matches_endpoint_oracle(fj):
    H, _ = fj
    lv = dense(101)
    lo, hi = endpoints(evaluate(H, [2.0]), lv)
    parts = [scale_endpoints(4, *tri_endpoints(-2, -1, 1, lv)),
             scale_endpoints(2, *tri_endpoints(-8, -4, 3, lv)),
             tri_endpoints(1, 2, 4, lv)]
    assert np.allclose(lo, sum(p[0] for p in parts), atol=1e-12)
    assert np.allclose(hi, sum(p[1] for p in parts), atol=1e-12)


def test_eval_active_constraint_is_zero(fj):
    _, (Y1, Y2) = fj
    assert is_zero(evaluate(Y1, [2.0]), tol=1e-12)
    assert affine_err(evaluate(Y2, [2.0]), -8, 1, -6, -1) <= 1e-12


def test_eval_at_single_level_and_zero_coefficients():
    e = FuzzyExpr(2, (Term(FuzzyNumber.crisp(0.0), (1, 1)),))
    assert evaluate(e, [3.0, -2.0], rho=0.5).width == 0.0
    e2 = FuzzyExpr(1, (Term(T(1, 2, 3), (2,)),))
    c = evaluate(e2, [2.0], rho=0.5)
    assert (c.lo, c.hi) == (6.0, 10.0)


def test_dimension_checks():
    e = FuzzyExpr(2, (Term(T(1, 2, 3), (1, 0)),))
    with pytest.raises(ValueError):
        evaluate(e, [1.0])
    with pytest.raises(ValueError):
        FuzzyExpr(2, (Term(T(1, 2, 3), (1,)),))
    with pytest.raises(ValueError):
        Term(T(1, 2, 3), (-1,))


def test_eval_interval_sum_oracle():
    rng = np.random.default_rng(3)
    lv = dense(21)
    for _ in range(1000):
        e = random_expr(rng, 2, 3)
        x = rng.uniform(0.1, 2.0, 2)  # positive box keeps every monomial's sign fixed
        lo, hi = endpoints(evaluate(e, x), lv)
        olo = np.zeros_like(lv)
        ohi = np.zeros_like(lv)
        for t in e.terms:
            g = float(np.prod(x ** np.array(t.exps)))
            a, b = scale_endpoints(g, *tri_endpoints(*t.coef.params, lv))
            olo += a
            ohi += b
        assert np.allclose(lo, olo, atol=1e-9) and np.allclose(hi, ohi, atol=1e-9)


# -- gradients --------------------------------------------------------------------

def test_gradients_of_constrained_example(fj):
    H, (Y1, _) = fj
    assert affine_err(grad(H, [2.0])[0], -16, 8, 7, -15) <= 1e-12
    assert affine_err(grad(Y1, [2.0])[0], -4, 9, 7, -2) <= 1e-12


def test_gradient_of_box_objective(box_objective):
    g = grad(box_objective, [1.5, 1.0])
    assert is_zero(g[0], tol=0.0)
    assert affine_err(g[1], 2, 2, 10, -6) <= 1e-12


def test_gh_constant_does_not_change_gradient():
    base = FuzzyExpr(1, (Term(T(-4, 5, 7), (1,)),))
    shifted = FuzzyExpr(1, base.terms, gh_const=T(-8, 10, 14))
    lv = dense(11)
    assert np.array_equal(endpoints(grad(base, [3.0])[0], lv), endpoints(grad(shifted, [3.0])[0], lv))


def test_grad_linear_over_concatenation():
    rng = np.random.default_rng(5)
    lv = dense(51)
    for _ in range(50):
        e1, e2 = random_expr(rng, 2, 2), random_expr(rng, 2, 3)
        x = rng.uniform(-2, 2, 2)
        g = grad(concat(e1, e2), x)
        g1, g2 = grad(e1, x), grad(e2, x)
        for i in range(2):
            lo, hi = endpoints(g[i], lv)
            a = endpoints(g1[i], lv)
            b = endpoints(g2[i], lv)
            assert np.allclose(lo, a[0] + b[0], atol=1e-9) and np.allclose(hi, a[1] + b[1], atol=1e-9)


# -- directional derivatives ---------------------------------------------------------

def test_directional_examples(box_objective):
    d = directional(box_objective, [1.5, 1.0], [0.0, -1.0])
    assert affine_err(d, -10, 6, -2, -2) <= 1e-12
    assert is_zero(directional(box_objective, [1.5, 1.0], [0.0, 0.0]), tol=0.0)
    assert is_zero(directional(box_objective, [1.5, 1.0], [1.0, 0.0]), tol=0.0)


def test_fd_oracle_objective(fj):
    H, _ = fj
    f = directional_fd_oracle(H, [2.0], [1.0], 1e-6)
    lv = dense(11)
    lo, hi = endpoints(f, lv)
    assert np.abs(lo - (-16 + 8 * lv)).max() <= 1e-4
    assert np.abs(hi - (7 - 15 * lv)).max() <= 1e-4


def test_fd_oracle_constant_and_linear():
    const = FuzzyExpr(1, (Term(T(1, 2, 4), (0,)),))
    assert is_zero(directional_fd_oracle(const, [1.0], [1.0], 0.1), tol=0.0)
    lin = FuzzyExpr(1, (Term(T(-4, 5, 7), (1,)),))
    for x, k in ((0.3, 0.5), (2.0, 1e-3), (-3.0, 2.0)):
        f = directional_fd_oracle(lin, [x], [1.0], k)
        assert affine_err(f, -4, 9, 7, -2, levels=dense(11)) <= 1e-9


def test_fd_oracle_linear_step_across_zero_is_not_exact():
    # c*x changes endpoint selection when x changes sign, so the quotient widens
    lin = FuzzyExpr(1, (Term(T(-4, 5, 7), (1,)),))
    f = directional_fd_oracle(lin, [-1.0], [1.0], 2.0)
    assert affine_err(f, -4, 9, 7, -2, levels=dense(11)) > 1.0


def test_fd_oracle_rejects_non_positive_step():
    with pytest.raises(ValueError):
        directional_fd_oracle(FuzzyExpr(1, ()), [0.0], [1.0], 0.0)


def fd_error(e, x, tau, step):
    d = directional(e, x, tau)
    f = directional_fd_oracle(e, x, tau, step)
    lv = check_grid(d, f)
    a, b = endpoints(d, lv), endpoints(f, lv)
    return max(np.abs(a[0] - b[0]).max(), np.abs(a[1] - b[1]).max())


def test_fd_error_decays_monotonically():
    # x and tau in the positive orthant: every monomial and its derivative along tau
    # share a sign, which is where the term-wise rule equals the gH-derivative
    rng = np.random.default_rng(17)
    for _ in range(40):
        e = random_expr(rng, 2, 4)
        x = rng.uniform(0.5, 2.0, 2)
        tau = rng.uniform(0.1, 1.0, 2)
        errs = [fd_error(e, x, tau, s) for s in (1e-4, 1e-5, 1e-6)]
        if errs[0] < 1e-12:
            continue  # exact: all terms linear along tau
        assert errs[0] >= 5 * errs[1] and errs[1] >= 5 * errs[2], errs


def test_termwise_gradient_encloses_fd_limit_with_mixed_signs():
    # (x-1)^2 falls while x rises at x = 0.5; the term-wise sum is wider than the limit
    e = FuzzyExpr(1, (Term(T(0, 1, 2), (2,), shift=(1.0,)), Term(T(0, 1, 2), (1,))))
    d = directional(e, [0.5], [1.0])
    f = directional_fd_oracle(e, [0.5], [1.0], 1e-7)
    lv = dense(11)
    (dl, dh), (fl, fh) = endpoints(d, lv), endpoints(f, lv)
    assert np.all(dl <= fl + 1e-6) and np.all(fh <= dh + 1e-6)
    assert dh[0] - dl[0] > fh[0] - fl[0] + 1.0


# -- convexity and the gradient inequality ------------------------------------------------

def test_convexity_positive_quadratic():
    e = FuzzyExpr(1, (Term(T(1, 2, 5), (2,)),))
    r = convexity_sample(e, [(-2, 2)], trials=1000, seed=1)
    assert r.ok and r.passes == 1000


def test_convexity_linear():
    e = FuzzyExpr(2, (Term(T(-1, 0, 3), (1, 0)), Term(T(2, 2, 2), (0, 1))))
    assert convexity_sample(e, [(0.5, 2), (-1, 1)], trials=300, seed=2).ok
    crisp = FuzzyExpr(2, (Term(T(-1, -1, -1), (1, 0)), Term(T(2, 2, 2), (0, 1))))
    assert convexity_sample(crisp, [(-2, 2), (-1, 1)], trials=300, seed=2).ok


def test_linear_fuzzy_function_is_not_lu_convex_across_zero():
    # c*(θa + (1-θ)b) is a subset of θ c a + (1-θ) c b when a, b differ in sign,
    # which breaks the endpoint-wise order
    e = FuzzyExpr(1, (Term(T(-1, 0, 3), (1,)),))
    assert not convexity_sample(e, [(-2, 2)], trials=300, seed=2).ok


def test_convexity_counterexample():
    e = FuzzyExpr(1, (Term(T(-2, -1, 1), (2,)),))
    r = convexity_sample(e, [(-2, 2)], trials=1000, seed=1)
    assert not r.ok and set(r.counterexample) == {"x1", "x2", "theta"}


def test_convexity_rejects_zero_trials():
    with pytest.raises(ValueError):
        convexity_sample(FuzzyExpr(1, ()), [(0, 1)], trials=0)


def test_gradient_inequality_examples():
    e = FuzzyExpr(1, (Term(T(1, 2, 5), (2,)),))
    r = gradient_inequality_check(e, [0.0], [1.0])
    assert is_zero(r.left, tol=0.0)
    assert affine_err(r.right, 1, 1, 5, -3) <= 1e-12
    assert r.order.weak_all
    same = gradient_inequality_check(e, [0.7], [0.7])
    assert same.order.weak_all and not same.order.strict_some
    lin = FuzzyExpr(1, (Term(T(-4, 5, 7), (1,)),))
    eq = gradient_inequality_check(lin, [0.5], [2.0])
    lv = eq.levels
    assert np.allclose(endpoints(eq.left, lv), endpoints(eq.right, lv), atol=1e-12)


def test_expr_json_round_trip(box_objective):
    again = expr_from_json(json.loads(json.dumps(expr_to_json(box_objective))))
    assert expr_to_json(again) == expr_to_json(box_objective)
    assert again.terms[0].shift == (1.5, 0.0)
