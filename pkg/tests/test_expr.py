import math

import pytest
from hypothesis import given

from conftest import expressions
from fvcert.expr import (ExprError, ac_equal, evaluate, parse, replace_at,
                         size, subexpr_at, subst, symbols_of, to_text,
                         validate)


class TestParse:
    def test_roundtrip_text(self):
        for text in ["x", "1.5", "(+ x y)", "(* 2.0 x y)",
                     "(cond (< x 0.0) (- 0.0 x) x)",
                     "(sqrt (+ (* x x) 1.0))"]:
            assert to_text(parse(text)) == text

    def test_negative_literal(self):
        assert parse("-2.5") == -2.5
        assert parse("(- x -1.0)") == ("-", "x", -1.0)

    def test_rejects_malformed(self):
        for text in ["(", "(+ x", "(+ x y))", "(bogus x)", "(abs x y)",
                     "(+ x)", ""]:
            with pytest.raises(ExprError):
                parse(text)

    @given(expressions())
    def test_roundtrip_any(self, e):
        assert parse(to_text(e)) == e


class TestEvaluate:
    def test_arithmetic(self):
        assert evaluate(parse("(+ 1.0 2.0 3.0)")) == 6.0
        assert evaluate(parse("(- (* 2.0 x) y)"), {"x": 3.0, "y": 1.0}) == 5.0

    def test_division_never_raises(self):
        assert evaluate(("/", 1.0, 0.0)) == math.inf
        assert evaluate(("/", -1.0, 0.0)) == -math.inf
        assert math.isnan(evaluate(("/", 0.0, 0.0)))

    def test_sqrt_negative_is_nan(self):
        assert math.isnan(evaluate(("sqrt", -4.0)))

    def test_minmax_drop_nan(self):
        # C fmin/fmax semantics: a NaN operand is ignored
        nan = ("/", 0.0, 0.0)
        assert evaluate(("min", nan, 2.0)) == 2.0
        assert evaluate(("max", 2.0, nan)) == 2.0

    def test_comparisons_are_indicator_valued(self):
        assert evaluate(("<", 1.0, 2.0)) == 1.0
        assert evaluate((">=", 1.0, 2.0)) == 0.0
        assert evaluate(("=", "x", "x"), {"x": 7.0}) == 1.0

    def test_cond(self):
        e = parse("(cond (< x 0.0) (- 0.0 x) x)")
        assert evaluate(e, {"x": -3.0}) == 3.0
        assert evaluate(e, {"x": 5.0}) == 5.0

    def test_unbound_symbol(self):
        with pytest.raises(ExprError):
            evaluate("x", {})

    def test_addition_is_left_to_right(self):
        # binary64 addition is not associative; order must be the tree's
        assert evaluate(("+", ("+", 1e30, -1e30), 1.0)) == 1.0
        assert evaluate(("+", 1e30, ("+", -1e30, 1.0))) == 0.0


class TestTreeOps:
    def test_subexpr_and_replace(self):
        e = parse("(+ (* x y) z)")
        assert subexpr_at(e, (1,)) == ("*", "x", "y")
        assert subexpr_at(e, (1, 2)) == "y"
        assert replace_at(e, (1,), "w") == ("+", "w", "z")
        assert replace_at(e, (), 0.0) == 0.0

    def test_subst(self):
        e = parse("(+ x (* x y))")
        assert subst(e, {"x": 2.0}) == ("+", 2.0, ("*", 2.0, "y"))
        assert subst(e, {"y": "x"}) == ("+", "x", ("*", "x", "x"))

    def test_symbols_and_size(self):
        e = parse("(+ x (* x y))")
        assert symbols_of(e) == {"x", "y"}
        assert size(e) == 5

    def test_validate_rejects_bad_arity(self):
        with pytest.raises(ExprError):
            validate(("+", "x"))
        with pytest.raises(ExprError):
            validate(("min", "x", "y", "z"))

    def test_ac_equal_mod_commutativity(self):
        assert ac_equal(parse("(+ x y)"), parse("(+ y x)"))
        assert ac_equal(parse("(* x (+ y z))"), parse("(* (+ z y) x)"))
        assert not ac_equal(parse("(- x y)"), parse("(- y x)"))
