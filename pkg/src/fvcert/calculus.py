"""Symbolic differentiation over the expression language.

differentiate returns raw derivative trees; the gradient/jacobian/hessian
wrappers simplify entrywise. abs is differentiated as x/|x|, which is
undefined at zero; provers treat unresolved quotients by abs accordingly.
"""

from __future__ import annotations

from .expr import Expr, ExprError, is_app, is_number
from .rules import Hook, simplify


def differentiate(e: Expr, var: str) -> Expr:
    if is_number(e):
        return 0.0
    if isinstance(e, str):
        return 1.0 if e == var else 0.0
    op = e[0]
    if op == "+":
        return ("+", *[differentiate(x, var) for x in e[1:]])
    if op == "-":
        return ("-", differentiate(e[1], var), differentiate(e[2], var))
    if op == "*":
        args = e[1:]
        terms = []
        for i in range(len(args)):
            factors = list(args)
            factors[i] = differentiate(args[i], var)
            terms.append(("*", *factors))
        return terms[0] if len(terms) == 1 else ("+", *terms)
    if op == "/":
        a, b = e[1], e[2]
        da, db = differentiate(a, var), differentiate(b, var)
        return ("/", ("-", ("*", da, b), ("*", a, db)), ("*", b, b))
    if op == "sqrt":
        u = e[1]
        return ("*", ("*", 0.5, ("/", 1.0, ("sqrt", u))), differentiate(u, var))
    if op == "abs":
        u = e[1]
        return ("*", ("/", u, ("abs", u)), differentiate(u, var))
    if op in ("min", "max"):
        # differentiate through the algebraic encoding of Eqs min/max
        a, b = e[1], e[2]
        half_sum = ("*", 0.5, ("+", a, b))
        half_abs = ("*", 0.5, ("abs", ("-", a, b)))
        enc = ("+", half_sum, half_abs) if op == "max" else ("-", half_sum, half_abs)
        return differentiate(enc, var)
    if op == "cond":
        return ("cond", e[1], differentiate(e[2], var), differentiate(e[3], var))
    raise ExprError(f"cannot differentiate through operator {op!r}")


def gradient(e: Expr, variables: tuple[str, ...] | list[str], *,
             nonzero: Hook | None = None, positive: Hook | None = None) -> list[Expr]:
    return [simplify(differentiate(e, v), nonzero=nonzero, positive=positive)
            for v in variables]


def jacobian(exprs, variables, *, nonzero: Hook | None = None,
             positive: Hook | None = None) -> list[list[Expr]]:
    return [gradient(f, variables, nonzero=nonzero, positive=positive)
            for f in exprs]


def hessian(e: Expr, variables, *, nonzero: Hook | None = None,
            positive: Hook | None = None) -> list[list[Expr]]:
    grad = gradient(e, variables, nonzero=nonzero, positive=positive)
    return jacobian(grad, variables, nonzero=nonzero, positive=positive)
