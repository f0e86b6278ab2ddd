"""Assumption contexts, sound-but-incomplete predicates, and closed-form
eigenvalues of symbolic 2x2 matrices.

Predicates answer False whenever truth cannot be established; adding
assumptions can only turn False answers into True ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .expr import Expr, ac_key, is_app, is_number
from .rules import _even_split, simplify


@dataclass(frozen=True)
class AssumptionContext:
    """What is known about the symbols in a proof goal.

    Conserved variables are real-valued; parameters are real and non-zero
    known constants. Extra facts (positivity, non-zeroness) are matched
    modulo commutativity.
    """

    cons_vars: tuple[str, ...] = ()
    params: tuple[tuple[str, float], ...] = ()
    positive: tuple[Expr, ...] = ()
    nonzero: tuple[Expr, ...] = ()
    nonnegative: tuple[Expr, ...] = ()
    density_like: tuple[str, ...] = ()

    def param_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.params)

    def with_positive(self, *exprs: Expr) -> "AssumptionContext":
        return replace(self, positive=self.positive + tuple(exprs))

    def with_nonzero(self, *exprs: Expr) -> "AssumptionContext":
        return replace(self, nonzero=self.nonzero + tuple(exprs))

    def with_nonnegative(self, *exprs: Expr) -> "AssumptionContext":
        return replace(self, nonnegative=self.nonnegative + tuple(exprs))

    # ---- assumption lookup (modulo commutativity) ----

    def _in(self, pool: tuple[Expr, ...], e: Expr) -> bool:
        k = ac_key(e)
        return any(ac_key(p) == k for p in pool)

    # ---- predicates ----

    def is_real(self, e: Expr) -> bool:
        if is_number(e):
            return math.isfinite(e)
        if isinstance(e, str):
            return e in self.cons_vars or e in self.param_names()
        op = e[0]
        if op in ("+", "-", "*"):
            return all(self.is_real(x) for x in e[1:])
        if op == "/":
            return (self.is_real(e[1]) and self.is_real(e[2])
                    and self.is_non_zero(e[2]))
        if op == "sqrt":
            return self.is_real(e[1]) and self.is_non_negative(e[1])
        if op == "abs":
            return self.is_real(e[1])
        if op in ("min", "max"):
            return self.is_real(e[1]) and self.is_real(e[2])
        return False

    def is_non_zero(self, e: Expr) -> bool:
        if is_number(e):
            return e != 0.0 and not math.isnan(e)
        if self._in(self.nonzero, e) or self._in(self.positive, e):
            return True
        if isinstance(e, str):
            return e in self.param_names()
        op = e[0]
        if op == "*":
            return all(self.is_non_zero(x) for x in e[1:])
        if op == "/":
            return self.is_non_zero(e[1]) and self.is_non_zero(e[2])
        if op == "abs":
            return self.is_non_zero(e[1])
        if op == "sqrt":
            return self.is_non_zero(e[1]) and self.is_non_negative(e[1])
        if op == "+":
            return all(self.is_positive(x) for x in e[1:])
        return False

    def is_positive(self, e: Expr) -> bool:
        if is_number(e):
            return e > 0.0
        if self._in(self.positive, e):
            return True
        if isinstance(e, str):
            return False
        op = e[0]
        if op in ("*", "/"):
            return all(self.is_positive(x) for x in e[1:])
        if op == "+":
            return all(self.is_positive(x) for x in e[1:])
        if op == "abs":
            return self.is_non_zero(e[1])
        if op == "sqrt":
            return self.is_positive(e[1])
        if op in ("min", "max"):
            return self.is_positive(e[1]) and self.is_positive(e[2])
        return False

    def is_non_negative(self, e: Expr) -> bool:
        if is_number(e):
            return e >= 0.0
        if self.is_positive(e):
            return True
        if self._in(self.nonnegative, e):
            return True
        if isinstance(e, str):
            return False
        op = e[0]
        if op in ("abs", "sqrt"):
            return True
        if op == "*":
            if _even_split(e) is not None:
                return True
            return all(self.is_non_negative(x) for x in e[1:])
        if op == "+":
            return all(self.is_non_negative(x) for x in e[1:])
        if op == "/":
            num_ok = self.is_non_negative(e[1])
            den = e[2]
            den_ok = self.is_positive(den) or (
                self.is_non_negative(den) and self.is_non_zero(den))
            return num_ok and den_ok
        if op in ("min", "max"):
            return self.is_non_negative(e[1]) and self.is_non_negative(e[2])
        return False

    def are_distinct(self, a: Expr, b: Expr) -> bool:
        """True when a and b provably never coincide (over the context)."""
        diff = simplify(("-", a, b), nonzero=self.is_non_zero,
                        positive=self.is_positive)
        if is_number(diff):
            return diff != 0.0 and not math.isnan(diff)
        return self.is_non_zero(diff)

    # hooks for the rewriter
    def hooks(self) -> dict:
        return {"nonzero": self.is_non_zero, "positive": self.is_positive}


def eigvals2(matrix, ctx: AssumptionContext | None = None) -> tuple[Expr, Expr]:
    """Closed-form eigenvalues of a symbolic 2x2 matrix [[a,b],[c,d]]:
    0.5*((a + d) -/+ sqrt(4bc + (a - d)^2)), simplified."""
    (a, b), (c, d) = matrix
    disc = ("+", ("*", 4.0, ("*", b, c)), ("*", ("-", a, d), ("-", a, d)))
    root = ("sqrt", disc)
    tr = ("+", a, d)
    hooks = ctx.hooks() if ctx is not None else {}
    lo = simplify(("*", 0.5, ("-", tr, root)), **hooks)
    hi = simplify(("*", 0.5, ("+", tr, root)), **hooks)
    return lo, hi
