"""Rewriting engine with floating-point-safe algebra.

The rule set deliberately avoids reassociating + or * across distinct
subterms and never commutes two symbolic operands; commutativity of
binary64 + and * is exploited only inside rule guards (ac_equal), which
is value-exact. Rules tagged exact=False preserve values only up to
rounding (distribution, collection, fraction arithmetic).

Strategy: outermost-leftmost, one rewrite per step, fixed registry order.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable, Optional

from .expr import (
    Expr,
    NonTermination,
    ac_equal,
    ac_key,
    evaluate,
    is_app,
    is_number,
    to_text,
)

DEFAULT_BUDGET = 100_000
BUDGET_ENV_VAR = "FVCERT_STEP_BUDGET"

Hook = Callable[[Expr], bool]


def _false(_e: Expr) -> bool:
    return False


def make_env(nonzero: Hook | None = None, positive: Hook | None = None,
             profile: str = "main") -> dict:
    return {
        "nonzero": nonzero or _false,
        "positive": positive or _false,
        "profile": profile,
    }


# ---------------------------------------------------------------------------
# helpers


def _split_coeff(e: Expr) -> tuple[float, Expr]:
    """Split a leading numeric factor: (* n rest...) -> (n, rest)."""
    if is_app(e, "*") and is_number(e[1]):
        rest = e[2:]
        return e[1], rest[0] if len(rest) == 1 else ("*", *rest)
    return 1.0, e


def _scaled(n: float, core: Expr) -> Expr:
    if n == 0.0:
        return 0.0
    if n == 1.0:
        return core
    return ("*", n, core)


def _merge_like(a: Expr, b: Expr, sign: float = 1.0) -> Optional[Expr]:
    """Combine a +/- sign*b when they share an ac-equal non-numeric core."""
    ca, xa = _split_coeff(a)
    cb, xb = _split_coeff(b)
    if is_number(xa) or is_number(xb):
        return None
    if not ac_equal(xa, xb):
        return None
    return _scaled(ca + sign * cb, xa)


def _mul_spine(e: Expr):
    """Ordered non-numeric leaf factors and numeric coefficient of a
    multiplicative spine (descends nested * only)."""
    coeff = 1.0
    leaves: list[Expr] = []

    def walk(x: Expr):
        nonlocal coeff
        if is_number(x):
            coeff *= x
        elif is_app(x, "*"):
            for sub in x[1:]:
                walk(sub)
        else:
            leaves.append(x)

    walk(e)
    return coeff, leaves


def _remove_factor(e: Expr, key) -> tuple[bool, Optional[Expr]]:
    """Remove one multiplicative leaf factor ac-equal to key.

    Returns (ok, remainder); remainder None means the factor was the
    whole expression. Sums require the factor in every addend.
    """
    if is_number(e):
        return False, None
    if is_app(e, "*"):
        kids = list(e[1:])
        for i, kid in enumerate(kids):
            ok, rem = _remove_factor(kid, key)
            if ok:
                if rem is None:
                    rest = kids[:i] + kids[i + 1:]
                else:
                    rest = kids[:i] + [rem] + kids[i + 1:]
                if len(rest) == 1:
                    return True, rest[0]
                return True, ("*", *rest)
        return False, None
    if is_app(e, "+") or is_app(e, "-"):
        out = []
        for kid in e[1:]:
            ok, rem = _remove_factor(kid, key)
            if not ok:
                return False, None
            out.append(1.0 if rem is None else rem)
        return True, (e[0], *out)
    if ac_key(e) == key:
        return True, None
    return False, None


# ---------------------------------------------------------------------------
# rules; each returns a replacement expression or None


def r_cond_select(e, env):
    if is_app(e, "cond") and is_number(e[1]):
        return e[2] if e[1] != 0.0 else e[3]
    return None


def r_fold_numeric(e, env):
    if not is_app(e) or e[0] == "cond":
        return None
    if all(is_number(x) for x in e[1:]):
        return evaluate(e)
    return None


def r_fold_first_pair(e, env):
    if (is_app(e, "+") or is_app(e, "*")) and len(e) > 3:
        if is_number(e[1]) and is_number(e[2]):
            v = e[1] + e[2] if e[0] == "+" else e[1] * e[2]
            return (e[0], v, *e[3:])
    return None


def r_const_left(e, env):
    if is_app(e, "+") or is_app(e, "*"):
        kids = list(e[1:])
        for i in range(len(kids) - 1):
            if not is_number(kids[i]) and is_number(kids[i + 1]):
                kids[i], kids[i + 1] = kids[i + 1], kids[i]
                return (e[0], *kids)
    return None


def r_add_zero(e, env):
    if is_app(e, "+") and e[1] == 0.0:
        rest = e[2:]
        return rest[0] if len(rest) == 1 else ("+", *rest)
    return None


def r_mul_zero(e, env):
    if is_app(e, "*") and e[1] == 0.0:
        return 0.0
    return None


def r_mul_one(e, env):
    if is_app(e, "*") and e[1] == 1.0:
        rest = e[2:]
        return rest[0] if len(rest) == 1 else ("*", *rest)
    return None


def r_sub_zero(e, env):
    if is_app(e, "-") and e[2] == 0.0:
        return e[1]
    return None


def r_sub_from_zero(e, env):
    if is_app(e, "-") and e[1] == 0.0 and not is_number(e[2]):
        return ("*", -1.0, e[2])
    return None


def r_sub_self(e, env):
    if is_app(e, "-") and not is_number(e[1]) and ac_equal(e[1], e[2]):
        return 0.0
    return None


def r_div_one(e, env):
    if is_app(e, "/") and e[2] == 1.0:
        return e[1]
    return None


def r_div_self(e, env):
    if is_app(e, "/") and not is_number(e[1]) and ac_equal(e[1], e[2]):
        if env["nonzero"](e[2]):
            return 1.0
    return None


def r_div_zero(e, env):
    if is_app(e, "/") and e[1] == 0.0 and env["nonzero"](e[2]):
        return 0.0
    return None


def r_mul_pull_const(e, env):
    if is_app(e, "*"):
        kids = list(e[1:])
        for i, kid in enumerate(kids):
            if is_app(kid, "*") and is_number(kid[1]):
                inner = kid[2:]
                rest = kids[:i] + list(inner) + kids[i + 1:]
                return ("*", kid[1], *rest)
    return None


def r_collect(e, env):
    if is_app(e, "+") and len(e) == 3:
        m = _merge_like(e[1], e[2], 1.0)
        if m is not None:
            return m
    if is_app(e, "-"):
        m = _merge_like(e[1], e[2], -1.0)
        if m is not None:
            return m
    return None


def r_collect_nested(e, env):
    if is_app(e, "+") and len(e) == 3:
        a, c = e[1], e[2]
        if is_app(a, "+") and len(a) == 3:
            m = _merge_like(a[1], c, 1.0)
            if m is not None:
                return ("+", m, a[2])
            m = _merge_like(a[2], c, 1.0)
            if m is not None:
                return ("+", a[1], m)
        if is_app(c, "+") and len(c) == 3:
            m = _merge_like(e[1], c[1], 1.0)
            if m is not None:
                return ("+", m, c[2])
            m = _merge_like(e[1], c[2], 1.0)
            if m is not None:
                return ("+", m, c[1])
    return None


def r_cross_cancel(e, env):
    if is_app(e, "+") and len(e) == 3:
        a, b = e[1], e[2]
        if is_app(a, "-") and is_app(b, "-"):
            p, q = a[1], a[2]
            r, s = b[1], b[2]
            if ac_equal(p, s):
                return ("-", r, q)
            if ac_equal(q, r):
                return ("-", p, s)
        if is_app(a, "-") and not is_number(b) and ac_equal(a[2], b):
            return a[1]
        if is_app(b, "-") and not is_number(a) and ac_equal(a, b[2]):
            return b[1]
    if is_app(e, "-"):
        a, b = e[1], e[2]
        if is_app(a, "+") and len(a) == 3:
            if ac_equal(a[1], b):
                return a[2]
            if ac_equal(a[2], b):
                return a[1]
        if is_app(a, "-") and ac_equal(a[1], b):
            return ("*", -1.0, a[2])
        if is_app(a, "-") and ac_equal(("*", -1.0, b), a[2]):
            # (p - q) - (-q)  ->  p
            return a[1]
        if is_app(a, "-") and is_app(b, "+") and len(b) == 3:
            # (p - q) - (r + s) when p = r  ->  -(q + s)
            if ac_equal(a[1], b[1]):
                return ("*", -1.0, ("+", a[2], b[2]))
            if ac_equal(a[1], b[2]):
                return ("*", -1.0, ("+", a[2], b[1]))
        if is_app(a, "+") and len(a) == 3 and is_app(b, "-"):
            # (p + q) - (r - s) when p = r  ->  q + s
            if ac_equal(a[1], b[1]):
                return ("+", a[2], b[2])
            if ac_equal(a[2], b[1]):
                return ("+", a[1], b[2])
        if is_app(b, "+") and len(b) == 3 and not is_number(a):
            if ac_equal(a, b[1]):
                return ("*", -1.0, b[2])
            if ac_equal(a, b[2]):
                return ("*", -1.0, b[1])
    return None


def r_fold_nested_const(e, env):
    # c1 + (c2 + rest) -> (c1+c2) + rest; only constants cross the nesting
    if is_app(e, "+") and len(e) == 3 and is_number(e[1]):
        inner = e[2]
        if is_app(inner, "+") and is_number(inner[1]):
            return ("+", e[1] + inner[1], *inner[2:]) if len(inner) > 3 \
                else ("+", e[1] + inner[1], inner[2])
    return None


def r_sub_neg(e, env):
    # a - b with both sides negatively scaled: flip to (-b) - (-a)
    if is_app(e, "-"):
        ca, xa = _split_coeff(e[1])
        cb, xb = _split_coeff(e[2])
        if ca < 0.0 and cb < 0.0 and not is_number(xa) and not is_number(xb):
            return ("-", _scaled(-cb, xb), _scaled(-ca, xa))
    return None


def r_distribute_const(e, env):
    if is_app(e, "*") and len(e) == 3 and is_number(e[1]):
        n, s = e[1], e[2]
        if is_app(s, "+"):
            return ("+", *[("*", n, x) for x in s[1:]])
        if is_app(s, "-"):
            return ("-", ("*", n, s[1]), ("*", n, s[2]))
    return None


def r_div_div(e, env):
    if is_app(e, "/"):
        a, b = e[1], e[2]
        if is_app(a, "/"):
            return ("/", a[1], ("*", a[2], b))
        if is_app(b, "/"):
            return ("/", ("*", a, b[2]), b[1])
    return None


def r_mul_div(e, env):
    if is_app(e, "*"):
        kids = list(e[1:])
        for i, kid in enumerate(kids):
            if is_app(kid, "/"):
                # min/max act as barriers: quotients are pushed into them
                # by div-minmax, never hoisted across
                if is_app(kid[1]) and kid[1][0] in ("min", "max"):
                    continue
                num = kids[:i] + [kid[1]] + kids[i + 1:]
                return ("/", ("*", *num), kid[2])
    return None


def r_add_div_same(e, env):
    if (is_app(e, "+") or is_app(e, "-")) and len(e) == 3:
        a, b = e[1], e[2]
        if is_app(a, "/") and is_app(b, "/") and ac_equal(a[2], b[2]):
            return ("/", (e[0], a[1], b[1]), a[2])
    return None


def r_add_div(e, env):
    if (is_app(e, "+") or is_app(e, "-")) and len(e) == 3:
        op = e[0]
        a, b = e[1], e[2]
        if is_app(a, "/") and is_app(b, "/"):
            return ("/", (op, ("*", a[1], b[2]), ("*", b[1], a[2])),
                    ("*", a[2], b[2]))
        if is_app(b, "/"):
            return ("/", (op, ("*", a, b[2]), b[1]), b[2])
        if is_app(a, "/"):
            return ("/", (op, a[1], ("*", b, a[2])), a[2])
    return None


def r_div_cancel(e, env):
    if not is_app(e, "/"):
        return None
    num, den = e[1], e[2]
    _, den_leaves = _mul_spine(den)
    candidates = list(den_leaves)
    # a sum only cancels via a factor common to all addends, so draw
    # candidates from its first addend
    for side in (den, num):
        if is_app(side, "+") or is_app(side, "-"):
            candidates.extend(_mul_spine(side[1])[1])
    seen = set()
    for leaf in candidates:
        key = ac_key(leaf)
        if key in seen:
            continue
        seen.add(key)
        ok_n, new_num = _remove_factor(num, key)
        if not ok_n:
            continue
        ok_d, new_den = _remove_factor(den, key)
        if not ok_d:
            continue
        if new_num is None:
            new_num = 1.0
        if new_den is None:
            return new_num
        return ("/", new_num, new_den)
    return None


def r_complete_square(e, env):
    """4xy + (x - y)^2 -> (x + y)^2, recognized modulo commutativity."""
    if not (is_app(e, "+") and len(e) == 3):
        return None
    for s, t in ((e[1], e[2]), (e[2], e[1])):
        if (is_app(t, "*") and len(t) == 3 and is_app(t[1], "-")
                and ac_equal(t[1], t[2])):
            x, y = t[1][1], t[1][2]
            if ac_equal(s, ("*", 4.0, ("*", x, y))):
                return ("*", ("+", x, y), ("+", x, y))
    return None


def r_expand(e, env):
    if not (is_app(e, "*") and len(e) >= 3):
        return None
    if len(e) == 3 and ac_equal(e[1], e[2]):
        return None  # keep perfect squares intact
    for i in range(1, len(e)):
        s = e[i]
        if is_app(s, "+") or is_app(s, "-"):
            rest = e[:i] + e[i + 1:]
            def with_term(x):
                return rest[:i] + (x,) + rest[i:] if len(rest) > 2 else \
                    ("*", rest[1], x) if i == 2 else ("*", x, rest[1])
            return (s[0], *[with_term(x) for x in s[1:]])
    return None


def _even_split(arg: Expr):
    """If arg is a product whose factors all pair up (even multiplicity)
    and whose numeric coefficient has an exact square root, return the
    'half' expression, else None."""
    coeff = 1.0
    num: list[Expr] = []
    den: list[Expr] = []

    def walk(x, inverted):
        nonlocal coeff
        if is_number(x):
            if inverted and x == 0.0:
                den.append(x)
                return
            coeff = coeff / x if inverted else coeff * x
        elif is_app(x, "*"):
            for sub in x[1:]:
                walk(sub, inverted)
        elif is_app(x, "/"):
            walk(x[1], inverted)
            walk(x[2], not inverted)
        else:
            (den if inverted else num).append(x)

    walk(arg, False)
    if coeff < 0.0:
        return None
    root = math.sqrt(coeff)
    if root * root != coeff:
        return None

    def halve(leaves):
        counts: dict = {}
        order = []
        for leaf in leaves:
            k = ac_key(leaf)
            if k not in counts:
                counts[k] = [leaf, 0]
                order.append(k)
            counts[k][1] += 1
        half = []
        for k in order:
            leaf, n = counts[k]
            if n % 2:
                return None
            half.extend([leaf] * (n // 2))
        return half

    num_half = halve(num)
    den_half = halve(den)
    if num_half is None or den_half is None:
        return None
    if not num and not den and coeff == 1.0:
        return None  # nothing to do

    def build(parts):
        if not parts:
            return 1.0
        if len(parts) == 1:
            return parts[0]
        return ("*", *parts)

    top: list[Expr] = ([] if root == 1.0 else [root]) + num_half
    res = build(top)
    if den_half:
        res = ("/", res, build(den_half))
    return res


def r_sqrt_even(e, env):
    if is_app(e, "sqrt"):
        half = _even_split(e[1])
        if half is not None:
            return half
    return None


def r_sqrt_split_const(e, env):
    if is_app(e, "sqrt") and is_app(e[1], "*") and is_number(e[1][1]):
        n = e[1][1]
        if n > 0.0:
            root = math.sqrt(n)
            if root * root == n and root != 1.0:
                rest = e[1][2:]
                inner = rest[0] if len(rest) == 1 else ("*", *rest)
                return ("*", root, ("sqrt", inner))
    return None


def _contains_div(e):
    if is_app(e):
        return e[0] == "/" or any(_contains_div(k) for k in e[1:])
    return False


def r_sqrt_div(e, env):
    # wait until the radicand is a single combined quotient, otherwise the
    # split strands odd powers of the denominator under separate radicals
    if is_app(e, "sqrt") and is_app(e[1], "/"):
        if not (_contains_div(e[1][1]) or _contains_div(e[1][2])):
            if r_div_cancel(e[1], env) is None:
                return ("/", ("sqrt", e[1][1]), ("sqrt", e[1][2]))
    return None


def r_sqrt_pair(e, env):
    if (is_app(e, "*") and len(e) == 3 and is_app(e[1], "sqrt")
            and is_app(e[2], "sqrt") and ac_equal(e[1][1], e[2][1])):
        return e[1][1]
    return None


def r_abs_abs(e, env):
    if is_app(e, "abs") and is_app(e[1], "abs"):
        return e[1]
    return None


def r_abs_sqrt(e, env):
    if is_app(e, "abs") and is_app(e[1], "sqrt"):
        return e[1]
    return None


def r_abs_neg_const(e, env):
    if is_app(e, "abs") and is_app(e[1], "*") and is_number(e[1][1]):
        n = e[1][1]
        if n < 0.0:
            return ("abs", ("*", -n, *e[1][2:]))
    return None


def r_abs_div(e, env):
    if is_app(e, "abs") and is_app(e[1], "/"):
        return ("/", ("abs", e[1][1]), ("abs", e[1][2]))
    return None


def r_abs_even(e, env):
    if is_app(e, "abs") and is_app(e[1], "*"):
        if _even_split(e[1]) is not None:
            return e[1]
    return None


def r_abs_pair(e, env):
    if (is_app(e, "*") and len(e) == 3 and is_app(e[1], "abs")
            and is_app(e[2], "abs") and ac_equal(e[1][1], e[2][1])):
        return ("*", e[1][1], e[2][1])
    return None


def r_abs_pos(e, env):
    if is_app(e, "abs") and env["positive"](e[1]):
        return e[1]
    return None


def r_abs_mul(e, env):
    if is_app(e, "abs") and is_app(e[1], "*"):
        if _even_split(e[1]) is not None:
            return None  # abs-even strips the bar in one step instead
        return ("*", *[("abs", k) for k in e[1][1:]])
    return None


def r_abs_sub_orient(e, env):
    # |a - b| = |b - a|; orient by key order so both spellings converge
    if is_app(e, "abs") and is_app(e[1], "-"):
        a, b = e[1][1], e[1][2]
        if repr(ac_key(a)) > repr(ac_key(b)):
            return ("abs", ("-", b, a))
    return None


def r_abs_factor(e, env):
    # pull a multiplicative factor shared by every addend out of |sum|
    if is_app(e, "abs") and (is_app(e[1], "+") or is_app(e[1], "-")):
        arg = e[1]
        for leaf in _mul_spine(arg[1])[1]:
            if is_number(leaf):
                continue
            ok, rem = _remove_factor(arg, ac_key(leaf))
            if ok and rem is not None:
                return ("*", ("abs", rem), ("abs", leaf))
    return None


def r_div_minmax(e, env):
    # (min a b)/d = (min a/d b/d) for d > 0: order statistics commute
    # with division by a positive value under monotone rounding
    if (is_app(e, "/") and is_app(e[1]) and e[1][0] in ("min", "max")
            and env["positive"](e[2])):
        op, a, b = e[1][0], e[1][1], e[1][2]
        return (op, ("/", a, e[2]), ("/", b, e[2]))
    return None


def r_mul_minmax(e, env):
    # c*(min a b) = (min c*a c*b) for c > 0, same monotonicity argument
    if is_app(e, "*") and len(e) == 3:
        p, m = e[1], e[2]
        if not (is_app(m) and m[0] in ("min", "max")):
            p, m = m, p
        if (is_app(m) and m[0] in ("min", "max")
                and ((is_number(p) and p > 0.0) or env["positive"](p))):
            return (m[0], ("*", p, m[1]), ("*", p, m[2]))
    return None


def _minmax_chain(e, op):
    if is_app(e) and e[0] == op:
        out = []
        for k in e[1:]:
            out.extend(_minmax_chain(k, op))
        return out
    return [e]


def r_minmax_sort(e, env):
    # min/max are fully commutative and associative in IEEE arithmetic, so
    # chains may be reordered into a canonical left-nested sorted spine;
    # operands are keyed by their own canonical form so that differently
    # spelled but convergent operands sort identically
    if not (is_app(e) and e[0] in ("min", "max")):
        return None
    parts = _minmax_chain(e, e[0])
    if len(parts) < 2:
        return None
    keyed = sorted(
        parts,
        key=lambda p: repr(simplify(p, nonzero=env["nonzero"],
                                    positive=env["positive"],
                                    profile=env["profile"])))
    rebuilt = keyed[0]
    for p in keyed[1:]:
        rebuilt = (e[0], rebuilt, p)
    if rebuilt == e:
        return None
    return rebuilt


def _contains_minmax(e):
    if is_app(e):
        return e[0] in ("min", "max") or any(_contains_minmax(k)
                                             for k in e[1:])
    return False


def r_minmax_expand(e, env):
    if env["profile"] != "main":
        return None
    if not (is_app(e) and e[0] in ("min", "max")):
        return None
    if is_number(e[1]) and is_number(e[2]):
        return None
    # expand bottom-up so sorted chains pair operands deterministically
    if _contains_minmax(e[1]) or _contains_minmax(e[2]):
        return None
    a, b = e[1], e[2]
    inner = ("+", ("*", 0.5, ("+", a, b)), ("*", 0.5, ("abs", ("-", a, b))))
    if e[0] == "max":
        return inner
    return ("-", ("*", 0.5, ("+", a, b)), ("*", 0.5, ("abs", ("-", a, b))))


def r_assoc_same(e, env):
    if is_app(e, "*"):
        flat = all(not is_app(x, "*") for x in e[1:])
        if flat:
            return None
        coeff, leaves = _mul_spine(e)
        if coeff == 1.0 and len(leaves) >= 3:
            k0 = ac_key(leaves[0])
            if all(ac_key(x) == k0 for x in leaves[1:]):
                return ("*", *leaves)
    return None


# name, fn, exact (value-preserving bit for bit when it fires)
REGISTRY: list[tuple[str, Callable, bool]] = [
    ("cond-select", r_cond_select, True),
    ("fold-numeric", r_fold_numeric, True),
    ("fold-first-pair", r_fold_first_pair, True),
    # swapping adjacent operands is exact for binary nodes, but inside an
    # n-ary chain it changes the left-to-right reduction order
    ("const-left", r_const_left, False),
    ("add-zero", r_add_zero, True),
    ("mul-zero", r_mul_zero, True),
    ("mul-one", r_mul_one, True),
    ("sub-zero", r_sub_zero, True),
    ("sub-from-zero", r_sub_from_zero, True),
    ("sub-self", r_sub_self, True),
    ("div-one", r_div_one, True),
    ("div-self", r_div_self, True),
    ("div-zero", r_div_zero, True),
    ("mul-pull-const", r_mul_pull_const, False),
    ("collect", r_collect, False),
    ("collect-nested", r_collect_nested, False),
    ("cross-cancel", r_cross_cancel, False),
    ("fold-nested-const", r_fold_nested_const, False),
    ("sub-neg", r_sub_neg, False),
    # squaring the rounded root is up to 1 ulp away from the radicand
    ("sqrt-pair", r_sqrt_pair, False),
    ("abs-pair", r_abs_pair, True),
    ("abs-abs", r_abs_abs, True),
    ("abs-sqrt", r_abs_sqrt, True),
    ("abs-neg-const", r_abs_neg_const, False),
    ("abs-div", r_abs_div, False),
    ("abs-even", r_abs_even, True),
    ("abs-pos", r_abs_pos, True),
    ("abs-mul", r_abs_mul, True),
    ("abs-sub-orient", r_abs_sub_orient, True),
    ("abs-factor", r_abs_factor, False),
    ("sqrt-even", r_sqrt_even, False),
    ("sqrt-split-const", r_sqrt_split_const, False),
    ("sqrt-div", r_sqrt_div, False),
    ("complete-square", r_complete_square, False),
    ("div-div", r_div_div, False),
    ("mul-div", r_mul_div, False),
    ("add-div-same", r_add_div_same, False),
    ("add-div", r_add_div, False),
    ("div-cancel", r_div_cancel, False),
    ("distribute-const", r_distribute_const, False),
    ("expand", r_expand, False),
    ("assoc-same", r_assoc_same, False),
    ("div-minmax", r_div_minmax, True),
    ("mul-minmax", r_mul_minmax, True),
    ("minmax-sort", r_minmax_sort, True),
    ("minmax-expand", r_minmax_expand, False),
]

RULES_BY_NAME = {name: (fn, exact) for name, fn, exact in REGISTRY}


# ---------------------------------------------------------------------------
# strategy


@dataclass
class RewriteStep:
    rule: str
    path: tuple[int, ...]
    before: Expr
    after: Expr


def simplify_step(e: Expr, env: dict) -> Optional[tuple[Expr, str, tuple[int, ...]]]:
    """Apply the first applicable rule, outermost-leftmost.

    Returns (new whole expression, rule name, path) or None.
    """

    def walk(node, path):
        for name, fn, _ in REGISTRY:
            res = fn(node, env)
            if res is not None and res != node:
                return res, name, path
        if isinstance(node, tuple):
            for i in range(1, len(node)):
                found = walk(node[i], path + (i,))
                if found is not None:
                    sub, name, p = found
                    return sub, name, p
        return None

    found = walk(e, ())
    if found is None:
        return None
    sub, name, path = found
    from .expr import replace_at
    return replace_at(e, path, sub), name, path


def _resolve_budget(budget: int | None) -> int:
    if budget is not None:
        return budget
    raw = os.environ.get(BUDGET_ENV_VAR)
    if raw:
        try:
            return int(raw)
        except ValueError:
            pass
    return DEFAULT_BUDGET


def simplify(e: Expr, *, nonzero: Hook | None = None, positive: Hook | None = None,
             profile: str = "main", budget: int | None = None) -> Expr:
    env = make_env(nonzero, positive, profile)
    limit = _resolve_budget(budget)
    for _ in range(limit):
        step = simplify_step(e, env)
        if step is None:
            return e
        e = step[0]
    if simplify_step(e, env) is None:
        return e
    raise NonTermination(limit)


def traced_simplify(e: Expr, *, nonzero: Hook | None = None,
                    positive: Hook | None = None, profile: str = "main",
                    budget: int | None = None) -> tuple[Expr, list[RewriteStep]]:
    env = make_env(nonzero, positive, profile)
    limit = _resolve_budget(budget)
    steps: list[RewriteStep] = []
    for _ in range(limit):
        step = simplify_step(e, env)
        if step is None:
            return e, steps
        new, name, path = step
        steps.append(RewriteStep(name, path, e, new))
        e = new
    if simplify_step(e, env) is None:
        return e, steps
    raise NonTermination(limit)


def apply_rule(name: str, e: Expr, env: dict) -> Optional[Expr]:
    """Apply one named rule at the root of e; used by certificate replay."""
    entry = RULES_BY_NAME.get(name)
    if entry is None:
        return None
    res = entry[0](e, env)
    if res is not None and res != e:
        return res
    return None


def equal_canonical(a: Expr, b: Expr, *, nonzero: Hook | None = None,
                    positive: Hook | None = None, profile: str = "main",
                    budget: int | None = None) -> bool:
    """True iff both expressions share a normal form."""
    sa = simplify(a, nonzero=nonzero, positive=positive, profile=profile,
                  budget=budget)
    sb = simplify(b, nonzero=nonzero, positive=positive, profile=profile,
                  budget=budget)
    return sa == sb
