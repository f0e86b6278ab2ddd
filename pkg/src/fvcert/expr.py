"""Expression trees for solver fluxes, eigenvalues, and limiter bodies.

An expression is one of:
  float            -- an IEEE binary64 literal
  str              -- a symbol (conserved variable or parameter)
  tuple            -- an application (op, operand, ...)

The text format is parenthesized prefix notation, e.g. (+ (* 0.5 u) 1.0).
"""

from __future__ import annotations

import math

Expr = float | str | tuple

# arity: exact int, or (min, None) for variadic
OPERATORS = {
    "+": (2, None),
    "-": (2, 2),
    "*": (2, None),
    "/": (2, 2),
    "abs": (1, 1),
    "sqrt": (1, 1),
    "min": (2, 2),
    "max": (2, 2),
    "cond": (3, 3),
    "<": (2, 2),
    "<=": (2, 2),
    ">": (2, 2),
    ">=": (2, 2),
    "=": (2, 2),
}

COMPARISONS = ("<", "<=", ">", ">=", "=")


class ExprError(ValueError):
    pass


class NonTermination(RuntimeError):
    """Raised when the rewriting step budget is exhausted."""

    def __init__(self, budget: int):
        super().__init__(f"rewrite step budget of {budget} exhausted")
        self.budget = budget


def is_number(e: Expr) -> bool:
    return isinstance(e, float)


def is_symbol(e: Expr) -> bool:
    return isinstance(e, str)


def is_app(e: Expr, op: str | None = None) -> bool:
    if not isinstance(e, tuple):
        return False
    return op is None or e[0] == op


def operands(e: tuple) -> tuple:
    return e[1:]


def validate(e: Expr) -> None:
    """Raise ExprError unless e is a well-formed expression."""
    if isinstance(e, float):
        return
    if isinstance(e, bool) or isinstance(e, int):
        raise ExprError(f"numeric literals must be floats, got {e!r}")
    if isinstance(e, str):
        if not e or e.startswith("(") or any(c.isspace() for c in e):
            raise ExprError(f"bad symbol {e!r}")
        return
    if not isinstance(e, tuple) or not e or not isinstance(e[0], str):
        raise ExprError(f"not an expression: {e!r}")
    op = e[0]
    if op not in OPERATORS:
        raise ExprError(f"unknown operator {op!r}")
    lo, hi = OPERATORS[op]
    n = len(e) - 1
    if n < lo or (hi is not None and n > hi):
        raise ExprError(f"operator {op!r} applied to {n} operands")
    for sub in e[1:]:
        validate(sub)


# ---------------------------------------------------------------------------
# text format


def _tokenize(text: str):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c == "#":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            tokens.append(c)
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()#":
                j += 1
            tokens.append(text[i:j])
            i = j
    return tokens


def _atom(tok: str) -> Expr:
    try:
        return float(tok)
    except ValueError:
        return tok


def parse(text: str) -> Expr:
    """Parse the prefix text format into an expression tree."""
    tokens = _tokenize(text)
    if not tokens:
        raise ExprError("empty expression text")
    pos = 0

    def rd():
        nonlocal pos
        if pos >= len(tokens):
            raise ExprError("unexpected end of input")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            if pos >= len(tokens):
                raise ExprError("unterminated application")
            op = tokens[pos]
            pos += 1
            if op in "()":
                raise ExprError("application must start with an operator")
            args = []
            while pos < len(tokens) and tokens[pos] != ")":
                args.append(rd())
            if pos >= len(tokens):
                raise ExprError("missing close paren")
            pos += 1
            return (op, *args)
        if tok == ")":
            raise ExprError("unbalanced close paren")
        return _atom(tok)

    e = rd()
    if pos != len(tokens):
        raise ExprError("trailing tokens after expression")
    validate(e)
    return e


def _fmt_num(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return repr(x)


def to_text(e: Expr) -> str:
    """Render an expression in the round-tripping text format."""
    if isinstance(e, float):
        return _fmt_num(e)
    if isinstance(e, str):
        return e
    return "(" + " ".join([e[0]] + [to_text(x) for x in e[1:]]) + ")"


# ---------------------------------------------------------------------------
# structural utilities


def symbols_of(e: Expr) -> set[str]:
    if isinstance(e, str):
        return {e}
    if isinstance(e, tuple):
        out: set[str] = set()
        for sub in e[1:]:
            out |= symbols_of(sub)
        return out
    return set()


def subst(e: Expr, mapping: dict[str, Expr]) -> Expr:
    if isinstance(e, str):
        return mapping.get(e, e)
    if isinstance(e, tuple):
        return (e[0], *[subst(x, mapping) for x in e[1:]])
    return e


def subexpr_at(e: Expr, path: tuple[int, ...]) -> Expr:
    for i in path:
        if not isinstance(e, tuple) or i < 1 or i >= len(e):
            raise ExprError(f"bad path component {i} in {to_text(e)}")
        e = e[i]
    return e


def replace_at(e: Expr, path: tuple[int, ...], new: Expr) -> Expr:
    if not path:
        return new
    i = path[0]
    if not isinstance(e, tuple) or i < 1 or i >= len(e):
        raise ExprError("bad replacement path")
    parts = list(e)
    parts[i] = replace_at(e[i], path[1:], new)
    return tuple(parts)


def size(e: Expr) -> int:
    if isinstance(e, tuple):
        return 1 + sum(size(x) for x in e[1:])
    return 1


# ---------------------------------------------------------------------------
# IEEE binary64 evaluation


def _fdiv(a: float, b: float) -> float:
    try:
        return a / b
    except ZeroDivisionError:
        if a == 0.0 or math.isnan(a):
            return math.nan
        return math.copysign(1.0, a) * math.copysign(1.0, b) * math.inf


def _fsqrt(a: float) -> float:
    if a < 0.0:
        return math.nan
    return math.sqrt(a)


def evaluate(e: Expr, bindings: dict[str, float] | None = None) -> float:
    """Evaluate with binary64 arithmetic, honoring the tree's association.

    n-ary + and * evaluate by left fold. Division by zero and sqrt of a
    negative produce inf/nan rather than raising.
    """
    bindings = bindings or {}
    if isinstance(e, float):
        return e
    if isinstance(e, str):
        try:
            return float(bindings[e])
        except KeyError:
            raise ExprError(f"unbound symbol {e!r}") from None
    op = e[0]
    if op == "cond":
        t = evaluate(e[1], bindings)
        return evaluate(e[2], bindings) if t != 0.0 else evaluate(e[3], bindings)
    args = [evaluate(x, bindings) for x in e[1:]]
    if op == "+":
        acc = args[0]
        for x in args[1:]:
            acc = acc + x
        return acc
    if op == "*":
        acc = args[0]
        for x in args[1:]:
            acc = acc * x
        return acc
    if op == "-":
        return args[0] - args[1]
    if op == "/":
        return _fdiv(args[0], args[1])
    if op == "abs":
        return abs(args[0])
    if op == "sqrt":
        return _fsqrt(args[0])
    if op == "min":
        a, b = args
        if math.isnan(a):
            return b
        if math.isnan(b):
            return a
        return min(a, b)
    if op == "max":
        a, b = args
        if math.isnan(a):
            return b
        if math.isnan(b):
            return a
        return max(a, b)
    if op in COMPARISONS:
        a, b = args
        res = {
            "<": a < b,
            "<=": a <= b,
            ">": a > b,
            ">=": a >= b,
            "=": a == b,
        }[op]
        return 1.0 if res else 0.0
    raise ExprError(f"cannot evaluate operator {op!r}")


# ---------------------------------------------------------------------------
# equality modulo commutativity/associativity of + and *
#
# Floating-point + and * are commutative (though not associative), so two
# expressions whose AC-normalized forms agree are safe to treat as equal
# inside rule guards; the guards never reorder operands in the output.


def _ac_sort(items):
    return tuple(sorted(items, key=repr))


def _ac_mul_parts(e: Expr):
    """Return (coeff, num_factors dict, den_factors dict) for a product."""
    coeff = 1.0
    num: dict = {}
    den: dict = {}

    def walk(x: Expr, inverted: bool):
        nonlocal coeff
        if isinstance(x, float):
            # a zero divisor cannot fold into the coefficient; keep it as
            # an opaque factor so unlike expressions stay unlike
            if not (inverted and x == 0.0):
                coeff = coeff / x if inverted else coeff * x
                return
        if is_app(x, "*"):
            for sub in x[1:]:
                walk(sub, inverted)
            return
        if is_app(x, "/"):
            walk(x[1], inverted)
            walk(x[2], not inverted)
            return
        k = ac_key(x)
        tgt = den if inverted else num
        tgt[k] = tgt.get(k, 0) + 1

    walk(e, False)
    # cancel shared factors: a/a is value-1 wherever defined; acceptable
    # for guard-level equality
    for k in list(num):
        if k in den:
            m = min(num[k], den[k])
            num[k] -= m
            den[k] -= m
            if not num[k]:
                del num[k]
            if not den[k]:
                del den[k]
    return coeff, num, den


def _ac_sum_parts(e: Expr):
    """Return (const, {term_key: coeff}) for a sum."""
    const = 0.0
    terms: dict = {}

    def walk(x: Expr, sign: float):
        nonlocal const
        if isinstance(x, float):
            const += sign * x
            return
        if is_app(x, "+"):
            for sub in x[1:]:
                walk(sub, sign)
            return
        if is_app(x, "-"):
            walk(x[1], sign)
            walk(x[2], -sign)
            return
        if is_app(x, "*") or is_app(x, "/"):
            coeff, num, den = _ac_mul_parts(x)
            if not num and not den:
                const += sign * coeff
                return
            if not den and len(num) == 1 and next(iter(num.values())) == 1:
                k = next(iter(num))
            else:
                k = ("*c", 1.0, _ac_sort(num.items()), _ac_sort(den.items()))
            terms[k] = terms.get(k, 0.0) + sign * coeff
            return
        k = ac_key(x)
        terms[k] = terms.get(k, 0.0) + sign

    walk(e, 1.0)
    for k in list(terms):
        if terms[k] == 0.0:
            del terms[k]
    return const, terms


def ac_key(e: Expr):
    """A canonical key equal for expressions that differ only by
    commutativity of + and * (and sign/reciprocal bookkeeping)."""
    if isinstance(e, float):
        return ("n", e)
    if isinstance(e, str):
        return ("s", e)
    op = e[0]
    if op in ("+", "-"):
        const, terms = _ac_sum_parts(e)
        if not terms:
            return ("n", const)
        if const == 0.0 and len(terms) == 1:
            (k, c), = terms.items()
            if c == 1.0:
                return k
        return ("+", const, _ac_sort(terms.items()))
    if op in ("*", "/"):
        coeff, num, den = _ac_mul_parts(e)
        if not num and not den:
            return ("n", coeff)
        if coeff == 1.0 and not den and len(num) == 1:
            (k, c), = num.items()
            if c == 1:
                return k
        return ("*c", coeff, _ac_sort(num.items()), _ac_sort(den.items()))
    if op in ("min", "max"):
        return (op, _ac_sort([ac_key(x) for x in e[1:]]))
    return (op, *[ac_key(x) for x in e[1:]])


def ac_equal(a: Expr, b: Expr) -> bool:
    return ac_key(a) == ac_key(b)
