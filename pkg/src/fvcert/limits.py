"""Variable transformation and symbolic limit evaluation.

Limits are taken over the extended reals.  Limits at +inf are computed by
the substitution var -> 1/t followed by a one-sided limit t -> 0+, which
removes most inf/inf forms before any IEEE arithmetic happens.  Whatever
indeterminacy survives shows up as a NaN after folding and is reported as
an Indeterminate marker rather than an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .expr import Expr, is_number, subst, symbols_of, evaluate, to_text
from .rules import simplify, DEFAULT_BUDGET

INF = math.inf

__all__ = ["INF", "Indeterminate", "LimitRecord", "variable_transform",
           "evaluate_limit"]


class Indeterminate:
    """Marker value for limits the evaluator cannot resolve."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Indeterminate"


INDETERMINATE = Indeterminate()


def variable_transform(e: Expr, var: str, replacement: Expr) -> Expr:
    """Replace every occurrence of var in e, leaving all other structure
    verbatim."""
    return subst(e, {var: replacement})


def _fresh_symbol(e: Expr, base: str = "t") -> str:
    used = symbols_of(e)
    name = base
    n = 0
    while name in used:
        n += 1
        name = f"{base}{n}"
    return name


@dataclass
class LimitRecord:
    """One limit evaluation, kept for certificate replay."""

    expr: Expr
    var: str
    point: float
    transformed: Expr
    reduced: Expr
    value: object = field(default=None)   # float or Indeterminate

    def replay(self, positive=None, nonzero=None) -> bool:
        got = evaluate_limit(self.expr, self.var, self.point,
                             positive=positive, nonzero=nonzero)
        if isinstance(self.value, Indeterminate):
            return isinstance(got, Indeterminate)
        if isinstance(got, Indeterminate):
            return False
        return got == self.value or (math.isnan(got) and math.isnan(self.value))


def evaluate_limit(e: Expr, var: str, point: float, *, positive=None,
                   nonzero=None, budget: int | None = None):
    """Limit of e as var -> point (one-sided from above for finite points
    at kinks; point may be +-inf).  Returns a float or Indeterminate."""
    rec = _limit_record(e, var, point, positive=positive, nonzero=nonzero,
                        budget=budget)
    return rec.value


def _limit_record(e: Expr, var: str, point: float, *, positive=None,
                  nonzero=None, budget: int | None = None) -> LimitRecord:
    budget = budget if budget is not None else DEFAULT_BUDGET
    if math.isinf(point):
        t = _fresh_symbol(e)
        transformed = variable_transform(e, var, ("/", 1.0, t))
        sign = 1.0 if point > 0 else -1.0

        def pos_hook(x, env=None):
            if x == t:
                return sign > 0
            return positive(x) if positive is not None else False

        def nz_hook(x, env=None):
            if x == t:
                return True
            return nonzero(x) if nonzero is not None else False

        reduced = simplify(transformed, nonzero=nz_hook, positive=pos_hook,
                           profile="limit", budget=budget)
        at_edge = subst(reduced, {t: math.copysign(0.0, sign)})
    else:
        def pos_hook2(x, env=None):
            return positive(x) if positive is not None else False

        def nz_hook2(x, env=None):
            return nonzero(x) if nonzero is not None else False

        transformed = e
        reduced = simplify(e, nonzero=nz_hook2, positive=pos_hook2,
                           profile="limit", budget=budget)
        at_edge = subst(reduced, {var: float(point)})

    try:
        value = evaluate(at_edge, {})
    except Exception:
        return LimitRecord(e, var, point, transformed, reduced, INDETERMINATE)
    if isinstance(value, float) and math.isnan(value):
        return LimitRecord(e, var, point, transformed, reduced, INDETERMINATE)
    return LimitRecord(e, var, point, transformed, reduced, value)
