import random

from conftest import (assert_close, central_difference, is_smooth_at,
                      random_bindings)
from fvcert.calculus import differentiate, gradient, hessian, jacobian
from fvcert.expr import evaluate, parse
from fvcert.rules import simplify
from fvcert.systems import BUILTIN_SYSTEMS, default_context


def d(text, var="x"):
    return simplify(differentiate(parse(text), var))


class TestSymbolicRules:
    def test_linearity(self):
        assert d("x") == 1.0
        assert d("y") == 0.0
        assert d("(+ x y)") == 1.0
        assert d("(- x y)") == 1.0
        assert d("(* 3.0 x)") == 3.0

    def test_product(self):
        assert d("(* x x)") == ("*", 2.0, "x")
        got = d("(* x y)")
        assert got == "y"

    def test_quotient_numeric(self):
        got = d("(/ x y)")
        env = {"x": 3.0, "y": 2.0}
        assert evaluate(got, env) == 0.5

    def test_sqrt_chain(self):
        # sqrt(x*x) collapses to x, so its derivative folds to 1
        assert d("(sqrt (* x x))") == 1.0
        got = d("(sqrt x)")
        assert evaluate(got, {"x": 4.0}) == 0.25

    def test_abs(self):
        got = d("(abs x)")
        assert evaluate(got, {"x": 2.5}) == 1.0
        assert evaluate(got, {"x": -2.5}) == -1.0

    def test_minmax_piecewise(self):
        dmin = d("(min x y)")
        assert evaluate(dmin, {"x": 1.0, "y": 5.0}) == 1.0
        assert evaluate(dmin, {"x": 5.0, "y": 1.0}) == 0.0
        dmax = d("(max x y)")
        assert evaluate(dmax, {"x": 5.0, "y": 1.0}) == 1.0


def check_ad_against_differences(points: int = 100, tol: float = 1e-6,
                                 seed: int = 977) -> int:
    """Compare every gradient/Jacobian/Hessian entry of every builtin
    flux against central differences at random in-domain points.
    Returns the number of comparisons made."""
    rng = random.Random(seed)
    checked = 0
    for name in sorted(BUILTIN_SYSTEMS):
        system = BUILTIN_SYSTEMS[name]
        ctx = default_context(system)
        hooks = ctx.hooks()
        pos = set(ctx.density_like)
        jac = jacobian(system.flux, system.cons_vars, **hooks)
        hessians = [hessian(f, system.cons_vars, **hooks)
                    for f in system.flux]
        params = system.param_dict()
        for _ in range(points):
            pt = random_bindings(rng, system.cons_vars, positive=pos)
            pt.update(params)
            for i, f in enumerate(system.flux):
                fval = lambda env: evaluate(f, env)
                for j, vj in enumerate(system.cons_vars):
                    if not is_smooth_at(fval, pt, vj):
                        continue
                    want = central_difference(fval, pt, vj)
                    got = evaluate(jac[i][j], pt)
                    assert_close(got, want, tol, f"{name} dF{i}/d{vj}")
                    checked += 1
                    gj = lambda env, e=jac[i][j]: evaluate(e, env)
                    for k, vk in enumerate(system.cons_vars):
                        if not is_smooth_at(gj, pt, vk):
                            continue
                        want2 = central_difference(gj, pt, vk)
                        got2 = evaluate(hessians[i][j][k], pt)
                        assert_close(got2, want2, tol,
                                     f"{name} d2F{i}/d{vj}d{vk}")
                        checked += 1
    return checked


def test_ad_matches_central_differences():
    assert check_ad_against_differences() > 1000


def test_gradient_shape():
    g = gradient(parse("(+ (* x x) (* x y))"), ("x", "y"))
    env = {"x": 2.0, "y": 3.0}
    assert evaluate(g[0], env) == 7.0
    assert evaluate(g[1], env) == 2.0
