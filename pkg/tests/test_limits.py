import math

from fvcert.expr import evaluate, parse
from fvcert.limits import (INF, Indeterminate, _limit_record, evaluate_limit,
                           variable_transform)
from fvcert.systems import get_limiter


def lim(text, var, point, positive=None):
    return evaluate_limit(parse(text), var, point, positive=positive)


class TestFiniteLimits:
    def test_polynomial(self):
        assert lim("(+ (* r r) 1.0)", "r", 2.0) == 5.0

    def test_removable_singularity(self):
        # r/r reduces before substitution when r is known non-zero on the
        # approach path
        got = evaluate_limit(parse("(/ (* 2.0 r) r)"), "r", 0.0,
                             nonzero=lambda e: e == "r")
        assert got == 2.0

    def test_zero_over_zero_is_indeterminate(self):
        got = lim("(/ (abs r) r)", "r", 0.0)
        assert isinstance(got, Indeterminate)


class TestInfiniteLimits:
    def test_reciprocal_vanishes(self):
        assert lim("(/ 1.0 r)", "r", INF) == 0.0

    def test_rational_ratio(self):
        got = lim("(/ r (+ 1.0 r))", "r", INF, positive=lambda e: e == "r")
        assert got == 1.0

    def test_unbounded(self):
        assert lim("(* r r)", "r", INF, positive=lambda e: e == "r") == INF


class TestLimiterEndpoints:
    """Known endpoint values of the builtin limiters."""

    def test_minmod(self):
        phi = get_limiter("minmod")
        pos = lambda e: e == "r"
        assert evaluate_limit(phi, "r", 0.0, positive=pos) == 0.0
        assert evaluate(phi, {"r": 1.0}) == 1.0
        assert evaluate_limit(phi, "r", INF, positive=pos) == 1.0

    def test_superbee(self):
        phi = get_limiter("superbee")
        pos = lambda e: e == "r"
        assert evaluate_limit(phi, "r", 0.0, positive=pos) == 0.0
        assert evaluate(phi, {"r": 1.0}) == 1.0
        assert evaluate_limit(phi, "r", INF, positive=pos) == 2.0

    def test_van_leer(self):
        phi = get_limiter("van-leer")
        pos = lambda e: e == "r"
        assert evaluate(phi, {"r": 1.0}) == 1.0
        assert evaluate_limit(phi, "r", INF, positive=pos) == 2.0


class TestNumericAgreement:
    def test_limits_match_numeric_approach(self):
        cases = [
            ("(/ (+ r 1.0) (+ r 2.0))", INF),
            ("(/ (* 3.0 r) (+ r 1.0))", INF),
            ("(+ r 4.0)", 0.0),
        ]
        pos = lambda e: e == "r"
        for text, point in cases:
            e = parse(text)
            sym = evaluate_limit(e, "r", point, positive=pos)
            probe = 1e9 if math.isinf(point) else point + 1e-9
            num = evaluate(e, {"r": probe})
            assert abs(sym - num) <= 1e-6 * max(1.0, abs(sym)), text


class TestRecords:
    def test_replay_matches(self):
        rec = _limit_record(parse("(/ r (+ 1.0 r))"), "r", INF,
                            positive=lambda e: e == "r")
        assert rec.value == 1.0
        assert rec.replay(positive=lambda e: e == "r")

    def test_replay_detects_tampered_value(self):
        rec = _limit_record(parse("(/ 1.0 r)"), "r", INF)
        rec.value = 0.5
        assert not rec.replay()

    def test_variable_transform(self):
        e = parse("(+ r (* r r))")
        assert variable_transform(e, "r", ("/", 1.0, "t")) == \
            ("+", ("/", 1.0, "t"), ("*", ("/", 1.0, "t"), ("/", 1.0, "t")))
