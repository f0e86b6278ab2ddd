"""Property provers with replayable certificates.

Each prover runs a fixed deduction recipe: simplify expressions through the
rewrite engine (recording every rule application), invoke the assumption
predicates, and evaluate symbolic limits where needed.  The outcome is a
ProofCertificate whose steps an independent checker can replay one by one
against nothing but the rule registry and the predicate definitions.

Verdicts are Proved, ProvedConditional (the proof needed caller-supplied
positivity assumptions), or NotProved with residual obligations.  Residual
obligations are scanned at 1000 random points; a genuine numeric
counterexample, when found, is attached as a witness.
"""

from __future__ import annotations

import math
import random
import zlib
from dataclasses import dataclass, replace

from .analysis import AssumptionContext
from .calculus import differentiate
from .expr import Expr, evaluate, is_app, is_number, parse, subst, symbols_of, to_text
from .limits import Indeterminate, LimitRecord, _limit_record
from .rules import RULES_BY_NAME, RewriteStep, make_env, traced_simplify
from .systems import PdeSystem, default_context, get_limiter, get_system

# ---------------------------------------------------------------------------
# certificate data model


@dataclass(frozen=True)
class PredicateStep:
    """One predicate invocation.  Decisive steps must all hold for a
    Proved / ProvedConditional verdict; exploratory ones may fail."""

    name: str
    args: tuple[Expr, ...]
    result: bool
    decisive: bool = True


@dataclass(frozen=True)
class LimitStep:
    record: LimitRecord


Step = object  # RewriteStep | PredicateStep | LimitStep
Obligation = tuple  # (relation, lhs, rhs) with relation in {">=", "=", "!=", "limit"}


@dataclass(frozen=True)
class Witness:
    """Numeric counterexample to a residual obligation."""

    obligation: int
    bindings: tuple[tuple[str, float], ...]
    lhs_value: float
    rhs_value: float


@dataclass(frozen=True)
class ProofCertificate:
    property: str
    subject: str
    assumptions: AssumptionContext
    steps: tuple[Step, ...]
    verdict: str
    extra: tuple[Expr, ...] = ()
    obligations: tuple[Obligation, ...] = ()
    witness: Witness | None = None
    discharged_by: tuple[Expr, ...] = ()

    @property
    def goal(self) -> str:
        return f"{self.property} {self.subject}"

    @property
    def step_count(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    failing_step: int | None = None  # 1-based
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


# ---------------------------------------------------------------------------
# proof builder


class _Builder:
    def __init__(self, prop: str, subject: str, ctx: AssumptionContext):
        self.prop = prop
        self.subject = subject
        self.ctx = ctx
        self.steps: list[Step] = []
        self.obligations: list[Obligation] = []

    def simp(self, e: Expr) -> Expr:
        out, trace = traced_simplify(e, **self.ctx.hooks())
        self.steps.extend(trace)
        return out

    def pred(self, name: str, result: bool, *args: Expr,
             decisive: bool = True) -> bool:
        self.steps.append(PredicateStep(name, tuple(args), result, decisive))
        return result

    def limit(self, e: Expr, var: str, point: float) -> LimitRecord:
        rec = _limit_record(e, var, point, positive=self.ctx.is_positive,
                            nonzero=self.ctx.is_non_zero)
        self.steps.append(LimitStep(rec))
        return rec

    def oblige(self, rel: str, lhs: Expr, rhs: Expr) -> None:
        if (rel, lhs, rhs) not in self.obligations:
            self.obligations.append((rel, lhs, rhs))

    def finish(self, *, extra: tuple[Expr, ...] = (),
               discharged_by: tuple[Expr, ...] = ()) -> ProofCertificate:
        obls = tuple(self.obligations)
        if obls:
            verdict = "NotProved"
            witness = _scan_obligations(f"{self.prop} {self.subject}",
                                        obls, self.ctx)
        else:
            verdict = "ProvedConditional" if extra else "Proved"
            witness = None
        return ProofCertificate(self.prop, self.subject, self.ctx,
                                tuple(self.steps), verdict,
                                extra=tuple(extra), obligations=obls,
                                witness=witness,
                                discharged_by=tuple(discharged_by))


# ---------------------------------------------------------------------------
# shared pieces


def _as_system(s) -> PdeSystem:
    return get_system(s) if isinstance(s, str) else s


def _raw_jacobian(system: PdeSystem) -> list[list[Expr]]:
    return [[differentiate(f, v) for v in system.cons_vars]
            for f in system.flux]


def _raw_eigs2(matrix) -> tuple[Expr, Expr]:
    # 0.5*((a + d) -/+ sqrt(4bc + (a - d)^2))
    (a, b2), (c, d) = matrix
    disc = ("+", ("*", 4.0, ("*", b2, c)), ("*", ("-", a, d), ("-", a, d)))
    tr, root = ("+", a, d), ("sqrt", disc)
    return ("*", 0.5, ("-", tr, root)), ("*", 0.5, ("+", tr, root))


def _matrix_eigs(b: _Builder, matrix) -> list[Expr]:
    if len(matrix) == 1:
        return [b.simp(matrix[0][0])]
    entries = [[b.simp(x) for x in row] for row in matrix]
    lo, hi = _raw_eigs2(entries)
    return [b.simp(lo), b.simp(hi)]


def _real_obligations(b: _Builder, lam: Expr) -> None:
    """Why is-real failed: unresolved radicand signs and denominators."""
    found = []

    def walk(e: Expr):
        if not is_app(e):
            return
        if e[0] == "sqrt" and not b.ctx.is_non_negative(e[1]):
            found.append((">=", e[1], 0.0))
        if e[0] == "/" and not b.ctx.is_non_zero(e[2]):
            found.append(("!=", e[2], 0.0))
        for k in e[1:]:
            walk(k)

    walk(lam)
    if not found:
        found.append(("real", lam, 0.0))
    for rel, lhs, rhs in found:
        b.oblige(rel, lhs, rhs)


def _check_real(b: _Builder, eigs: list[Expr], strict: bool) -> None:
    for lam in eigs:
        if not b.pred("is-real", b.ctx.is_real(lam), lam):
            _real_obligations(b, lam)
    if strict:
        if len(eigs) < 2:
            return  # a single characteristic speed is trivially simple
        a, c = eigs[0], eigs[1]
        if not b.pred("are-distinct", b.ctx.are_distinct(a, c), a, c):
            b.oblige("!=", b.simp(("-", c, a)), 0.0)


# ---------------------------------------------------------------------------
# Lax-Friedrichs provers


def prove_lax_hyperbolicity(system, strict: bool = False,
                            ctx: AssumptionContext | None = None) -> ProofCertificate:
    system = _as_system(system)
    ctx = ctx or default_context(system)
    prop = "strict-hyperbolicity" if strict else "hyperbolicity"
    b = _Builder(prop, system.name, ctx)
    eigs = _matrix_eigs(b, _raw_jacobian(system))
    _check_real(b, eigs, strict)
    return b.finish()


def prove_cfl_stability(system,
                        ctx: AssumptionContext | None = None) -> ProofCertificate:
    """The declared maximal signal speeds must be exactly the |eigenvalue|
    set of the flux Jacobian, and the grid CFL number must be admissible."""
    system = _as_system(system)
    ctx = ctx or default_context(system)
    b = _Builder("cfl", system.name, ctx)
    eigs = _matrix_eigs(b, _raw_jacobian(system))
    computed = sorted((b.simp(("abs", lam)) for lam in eigs), key=repr)
    declared = sorted((b.simp(s) for s in system.max_speeds), key=repr)
    for got, want in zip(computed, declared):
        if not b.pred("equal-normal-form", got == want, got, want):
            b.oblige("=", got, want)
    cfl = system.grid.cfl
    if not b.pred("grid-cfl", 0.0 < cfl <= 1.0, cfl):
        b.oblige(">=", 1.0, cfl)
    return b.finish()


def _lipschitz_attempt(b: _Builder, system: PdeSystem) -> None:
    for f in system.flux:
        grad = [b.simp(differentiate(f, v)) for v in system.cons_vars]
        hess = [[b.simp(differentiate(g, v)) for v in system.cons_vars]
                for g in grad]
        if system.rank == 1:
            h = hess[0][0]
            if not b.pred("is-non-negative", b.ctx.is_non_negative(h), h):
                b.oblige(">=", h, 0.0)
            continue
        h01, h10 = hess[0][1], hess[1][0]
        if not b.pred("equal-normal-form", h01 == h10, h01, h10):
            b.oblige("=", h01, h10)
        lo, hi = _raw_eigs2(hess)
        for eig in (b.simp(lo), b.simp(hi)):
            if not b.pred("is-non-negative", b.ctx.is_non_negative(eig), eig):
                b.oblige(">=", eig, 0.0)


def _needs_extras(run, ctx: AssumptionContext,
                  extras: tuple[Expr, ...]) -> bool:
    """True when a successful proof genuinely depended on the extras."""
    if not extras:
        return False
    bare = replace(ctx, positive=tuple(p for p in ctx.positive
                                       if p not in extras))
    probe = _Builder("probe", "probe", bare)
    run(probe)
    return bool(probe.obligations)


def _discharge_hint(run, ctx: AssumptionContext) -> tuple[Expr, ...]:
    """Would positivity of the density-like symbols finish the proof?"""
    if not ctx.density_like:
        return ()
    probe = _Builder("probe", "probe", ctx.with_positive(*ctx.density_like))
    run(probe)
    if probe.obligations:
        return ()
    return tuple(ctx.density_like)


def prove_lax_lipschitz(system,
                        ctx: AssumptionContext | None = None) -> ProofCertificate:
    system = _as_system(system)
    base = default_context(system)
    ctx = ctx or base
    b = _Builder("lipschitz", system.name, ctx)
    run = lambda bb: _lipschitz_attempt(bb, system)
    run(b)
    if b.obligations:
        return b.finish(discharged_by=_discharge_hint(run, ctx))
    extras = tuple(p for p in ctx.positive if p not in base.positive)
    if _needs_extras(run, ctx, extras):
        return b.finish(extra=extras)
    return b.finish()


# ---------------------------------------------------------------------------
# Roe provers


def _rename(e: Expr, names: tuple[str, ...], suffix: str) -> Expr:
    return subst(e, {v: v + suffix for v in names})


def _roe_context(system: PdeSystem, ctx: AssumptionContext) -> AssumptionContext:
    cons = system.cons_vars

    def both(pool):
        out = []
        for e in pool:
            if symbols_of(e) & set(cons):
                out.extend((_rename(e, cons, "_L"), _rename(e, cons, "_R")))
            else:
                out.append(e)
        return tuple(out)

    return AssumptionContext(
        cons_vars=tuple(v + s for s in ("_L", "_R") for v in cons),
        params=ctx.params,
        positive=both(ctx.positive),
        nonzero=both(ctx.nonzero),
        nonnegative=both(ctx.nonnegative),
        density_like=tuple(v + s for s in ("_L", "_R")
                           for v in ctx.density_like))


def _roe_matrix(b: _Builder, system: PdeSystem) -> list[list[Expr]]:
    """Arithmetic average of the flux Jacobian at the two interface states."""
    cons = system.cons_vars
    jac = _raw_jacobian(system)
    return [[b.simp(("*", 0.5, ("+", _rename(x, cons, "_L"),
                                _rename(x, cons, "_R"))))
             for x in row] for row in jac]


def prove_roe_hyperbolicity(system, strict: bool = False,
                            ctx: AssumptionContext | None = None) -> ProofCertificate:
    system = _as_system(system)
    base = default_context(system)
    ctx = ctx or base
    rctx = _roe_context(system, ctx)
    prop = "roe-strict" if strict else "roe-hyperbolicity"
    b = _Builder(prop, system.name, rctx)

    def run(bb: _Builder) -> None:
        matrix = _roe_matrix(bb, system)
        _check_real(bb, _matrix_eigs(bb, matrix), strict)

    run(b)
    if b.obligations:
        return b.finish(discharged_by=_discharge_hint(run, rctx))
    extras = tuple(p for p in rctx.positive
                   if p not in _roe_context(system, base).positive)
    if _needs_extras(run, rctx, extras):
        return b.finish(extra=extras)
    return b.finish()


def prove_roe_conservation(system,
                           ctx: AssumptionContext | None = None) -> ProofCertificate:
    """A(U_L, U_R) (U_R - U_L) must equal F(U_R) - F(U_L) identically."""
    system = _as_system(system)
    ctx = ctx or default_context(system)
    rctx = _roe_context(system, ctx)
    b = _Builder("roe-conservation", system.name, rctx)
    cons = system.cons_vars
    matrix = _roe_matrix(b, system)
    du = [("-", v + "_R", v + "_L") for v in cons]
    for i, f in enumerate(system.flux):
        terms = [("*", matrix[i][j], du[j]) for j in range(system.rank)]
        lhs = terms[0] if len(terms) == 1 else ("+", *terms)
        df = ("-", _rename(f, cons, "_R"), _rename(f, cons, "_L"))
        resid = b.simp(("-", lhs, df))
        if not b.pred("equal-normal-form", resid == 0.0, resid, 0.0):
            b.oblige("=", resid, 0.0)
    return b.finish()


# ---------------------------------------------------------------------------
# limiter provers


def _limiter_context() -> AssumptionContext:
    # slope ratios are taken on the r > 0 branch
    return AssumptionContext(cons_vars=("r",), positive=("r",), nonzero=("r",))


def _as_limiter(l) -> tuple[str, Expr]:
    if isinstance(l, str):
        return l, get_limiter(l)
    name, body = l
    return name, body if not isinstance(body, str) else parse(body)


def prove_limiter_symmetry(limiter) -> ProofCertificate:
    """phi(r)/r and phi(1/r) must share a normal form on r > 0."""
    name, body = _as_limiter(limiter)
    b = _Builder("symmetry", name, _limiter_context())
    lhs = b.simp(("/", body, "r"))
    rhs = b.simp(subst(body, {"r": ("/", 1.0, "r")}))
    if not b.pred("equal-normal-form", lhs == rhs, lhs, rhs):
        b.oblige("=", lhs, rhs)
    return b.finish()


def _kink_points(body: Expr, var: str) -> list[float]:
    """Positive zeros of the min/max/abs switching expressions, isolated
    numerically on a dense grid followed by bisection."""
    cands: list[Expr] = []

    def collect(e: Expr):
        if is_app(e):
            if e[0] in ("min", "max"):
                cands.append(("-", e[1], e[2]))
            elif e[0] == "abs":
                cands.append(e[1])
            for k in e[1:]:
                collect(k)

    collect(body)
    lo, hi, n = 1e-9, 64.0, 20000
    roots: set[float] = set()
    for c in cands:
        def val(x: float) -> float:
            return evaluate(c, {var: x})
        try:
            prev_x, prev = lo, val(lo)
        except Exception:
            continue
        for i in range(1, n + 1):
            x = lo + i * (hi - lo) / n
            try:
                cur = val(x)
            except Exception:
                prev_x, prev = x, math.nan
                continue
            if prev == 0.0:
                roots.add(round(prev_x, 9))
            elif prev * cur < 0.0:
                a, fa, bx = prev_x, prev, x
                for _ in range(100):
                    m = 0.5 * (a + bx)
                    fm = val(m)
                    if fm == 0.0:
                        a = bx = m
                        break
                    if fa * fm < 0.0:
                        bx = m
                    else:
                        a, fa = m, fm
                roots.add(round(0.5 * (a + bx), 9))
            prev_x, prev = x, cur
    out: list[float] = []
    for r in sorted(roots):
        if r > 1e-7 and (not out or r - out[-1] > 1e-7):
            out.append(r)
    return out


def _resolve_branches(e: Expr, var: str, point: float) -> Expr:
    """Fix every min/max/abs to the branch it takes at var = point."""
    if not is_app(e):
        return e
    kids = [_resolve_branches(k, var, point) for k in e[1:]]
    if e[0] in ("min", "max"):
        va = evaluate(kids[0], {var: point})
        vb = evaluate(kids[1], {var: point})
        if e[0] == "min":
            return kids[0] if va <= vb else kids[1]
        return kids[0] if va >= vb else kids[1]
    if e[0] == "abs":
        v = evaluate(kids[0], {var: point})
        return kids[0] if v >= 0.0 else ("*", -1.0, kids[0])
    return (e[0], *kids)


TVD_LIMIT_BOUNDS: tuple[tuple[float, float, float], ...] = (
    (0.0, 0.0, 1.0),
    (1.0, 1.0, 1.0),
    (2.0, 1.0, 2.0),
    (math.inf, 0.0, 2.0),
)


def prove_limiter_tvd(limiter) -> ProofCertificate:
    """Second-order TVD box: limit values at r -> 0, 1, 2, inf inside
    their admissible ranges, plus concavity on every smooth piece."""
    name, body = _as_limiter(limiter)
    ctx = _limiter_context()
    b = _Builder("tvd", name, ctx)
    for point, lo, hi in TVD_LIMIT_BOUNDS:
        rec = b.limit(body, "r", point)
        val = rec.value if is_number(rec.value) else "indeterminate"
        ok = is_number(val) and lo <= val <= hi
        if not b.pred("in-range", ok, lo, val, hi):
            b.oblige("limit", body, point)
    kinks = _kink_points(body, "r")
    edges = [0.0] + kinks
    mids = [0.5 * (edges[i] + edges[i + 1]) for i in range(len(kinks))]
    mids.append(edges[-1] + 1.0 if kinks else 1.0)
    for mid in mids:
        piece = _resolve_branches(body, "r", mid)
        b.pred("piece-selects", True, "r", mid, body, piece)
        d1 = b.simp(differentiate(piece, "r"))
        d2 = b.simp(differentiate(d1, "r"))
        neg = b.simp(("*", -1.0, d2))
        if not b.pred("is-non-negative", ctx.is_non_negative(neg), neg):
            b.oblige(">=", neg, 0.0)
    return b.finish()


# ---------------------------------------------------------------------------
# counterexample scan


def _scan_obligations(goal: str, obligations: tuple[Obligation, ...],
                      ctx: AssumptionContext) -> Witness | None:
    rng = random.Random(zlib.crc32(goal.encode()))
    params = dict(ctx.params)
    positives = {p for p in ctx.positive if isinstance(p, str)}
    for idx, (rel, lhs, rhs) in enumerate(obligations):
        if rel not in (">=", "=", "!="):
            continue
        syms = sorted((symbols_of(lhs) | symbols_of(rhs)) - set(params))
        for _ in range(1000):
            binds = dict(params)
            for s in syms:
                if s in positives:
                    binds[s] = rng.uniform(1e-3, 10.0)
                else:
                    v = rng.uniform(-10.0, 10.0)
                    while abs(v) < 1e-6:
                        v = rng.uniform(-10.0, 10.0)
                    binds[s] = v
            try:
                lv, rv = evaluate(lhs, binds), evaluate(rhs, binds)
            except Exception:
                continue
            if not (math.isfinite(lv) and math.isfinite(rv)):
                continue
            scale = max(1.0, abs(lv), abs(rv))
            bad = ((rel == ">=" and lv < rv - 1e-12 * scale)
                   or (rel == "=" and abs(lv - rv) > 1e-9 * scale)
                   or (rel == "!=" and abs(lv - rv) <= 1e-12 * scale))
            if bad:
                free = tuple(sorted((s, binds[s]) for s in syms))
                return Witness(idx, free, lv, rv)
    return None


# ---------------------------------------------------------------------------
# replay checking

_PRED_REPLAY = {
    "is-real": lambda ctx, a: ctx.is_real(a[0]),
    "is-non-zero": lambda ctx, a: ctx.is_non_zero(a[0]),
    "is-positive": lambda ctx, a: ctx.is_positive(a[0]),
    "is-non-negative": lambda ctx, a: ctx.is_non_negative(a[0]),
    "are-distinct": lambda ctx, a: ctx.are_distinct(a[0], a[1]),
    "equal-normal-form": lambda ctx, a: a[0] == a[1],
    "in-range": lambda ctx, a: (is_number(a[1]) and a[0] <= a[1] <= a[2]),
    "grid-cfl": lambda ctx, a: 0.0 < a[0] <= 1.0,
    "piece-selects":
        lambda ctx, a: _resolve_branches(a[2], a[0], a[1]) == a[3],
}


def _subterm(e: Expr, path: tuple[int, ...]) -> Expr:
    for i in path:
        e = e[i]
    return e


def _graft(e: Expr, path: tuple[int, ...], sub: Expr) -> Expr:
    if not path:
        return sub
    i = path[0]
    return e[:i] + (_graft(e[i], path[1:], sub),) + e[i + 1:]


def check_certificate(cert: ProofCertificate) -> CheckResult:
    """Replay every recorded step; confirm the verdict follows from them."""
    ctx = cert.assumptions
    env = make_env(ctx.is_non_zero, ctx.is_positive, "main")
    decisive_ok = True
    for i, step in enumerate(cert.steps, start=1):
        if isinstance(step, RewriteStep):
            entry = RULES_BY_NAME.get(step.rule)
            if entry is None:
                return CheckResult(False, i, f"unknown rule {step.rule}")
            try:
                got = entry[0](_subterm(step.before, step.path), env)
            except Exception:
                return CheckResult(False, i, f"rule {step.rule} raised")
            if got is None or _graft(step.before, step.path, got) != step.after:
                return CheckResult(False, i,
                                   f"rule {step.rule} does not reproduce step")
        elif isinstance(step, PredicateStep):
            fn = _PRED_REPLAY.get(step.name)
            if fn is None:
                return CheckResult(False, i, f"unknown predicate {step.name}")
            try:
                got = bool(fn(ctx, step.args))
            except Exception:
                return CheckResult(False, i, f"predicate {step.name} raised")
            if got != step.result:
                return CheckResult(False, i,
                                   f"predicate {step.name} replays as {got}")
            if step.decisive and not step.result:
                decisive_ok = False
        elif isinstance(step, LimitStep):
            if not step.record.replay(positive=ctx.is_positive,
                                      nonzero=ctx.is_non_zero):
                return CheckResult(False, i, "limit does not replay")
        else:
            return CheckResult(False, i, "unknown step kind")
    if cert.verdict == "NotProved":
        if not cert.obligations:
            return CheckResult(False, None, "NotProved without obligations")
    elif cert.verdict in ("Proved", "ProvedConditional"):
        if cert.obligations or not decisive_ok:
            return CheckResult(False, None,
                               "verdict claims success over failed steps")
        if cert.verdict == "ProvedConditional" and not cert.extra:
            return CheckResult(False, None,
                               "conditional verdict without extra assumptions")
    else:
        return CheckResult(False, None, f"unknown verdict {cert.verdict}")
    return CheckResult(True)


# ---------------------------------------------------------------------------
# serialization: stable line-oriented text, one step per record


def _fmt(x: float) -> str:
    return repr(float(x))


def serialize_certificate(cert: ProofCertificate) -> str:
    ctx = cert.assumptions
    out = ["fvcert certificate v1",
           f"property: {cert.property}",
           f"subject: {cert.subject}",
           "cons-vars: " + " ".join(ctx.cons_vars)]
    for n, v in ctx.params:
        out.append(f"param: {n} {_fmt(v)}")
    for label, pool in (("positive", ctx.positive), ("nonzero", ctx.nonzero),
                        ("nonnegative", ctx.nonnegative)):
        for e in pool:
            out.append(f"{label}: {to_text(e)}")
    for s in ctx.density_like:
        out.append(f"density-like: {s}")
    out.append(f"verdict: {cert.verdict}")
    for e in cert.extra:
        out.append(f"extra: {to_text(e)}")
    for e in cert.discharged_by:
        out.append(f"discharged-by: {to_text(e)}")
    out.append(f"steps: {len(cert.steps)}")
    for step in cert.steps:
        if isinstance(step, RewriteStep):
            path = ".".join(str(i) for i in step.path) or "root"
            out.append(f"rewrite {step.rule} {path}")
            out.append(f"  before {to_text(step.before)}")
            out.append(f"  after {to_text(step.after)}")
        elif isinstance(step, PredicateStep):
            out.append(f"predicate {step.name} result={int(step.result)} "
                       f"decisive={int(step.decisive)} nargs={len(step.args)}")
            for a in step.args:
                out.append(f"  arg {to_text(a)}")
        else:
            rec = step.record
            val = ("indeterminate" if isinstance(rec.value, Indeterminate)
                   else _fmt(rec.value))
            out.append(f"limit {rec.var} {_fmt(rec.point)} {val}")
            out.append(f"  expr {to_text(rec.expr)}")
            out.append(f"  transformed {to_text(rec.transformed)}")
            out.append(f"  reduced {to_text(rec.reduced)}")
    for rel, lhs, rhs in cert.obligations:
        out.append(f"obligation {rel}")
        out.append(f"  lhs {to_text(lhs)}")
        out.append(f"  rhs {to_text(rhs)}")
    if cert.witness is not None:
        w = cert.witness
        out.append(f"witness {w.obligation} {_fmt(w.lhs_value)} "
                   f"{_fmt(w.rhs_value)}")
        for s, v in w.bindings:
            out.append(f"  bind {s} {_fmt(v)}")
    out.append("end")
    return "\n".join(out) + "\n"


class CertificateFormatError(ValueError):
    pass


def parse_certificate(text: str) -> ProofCertificate:
    try:
        return _parse_certificate(text)
    except CertificateFormatError:
        raise
    except (ValueError, IndexError) as exc:
        raise CertificateFormatError(f"malformed certificate: {exc}") from None


def _parse_certificate(text: str) -> ProofCertificate:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "fvcert certificate v1":
        raise CertificateFormatError("not a certificate document")
    pos = 1

    def take(prefix: str) -> str:
        nonlocal pos
        if pos >= len(lines) or not lines[pos].startswith(prefix):
            raise CertificateFormatError(f"expected {prefix!r} at line {pos + 1}")
        val = lines[pos][len(prefix):]
        pos += 1
        return val

    def take_all(prefix: str) -> list[str]:
        nonlocal pos
        out = []
        while pos < len(lines) and lines[pos].startswith(prefix):
            out.append(lines[pos][len(prefix):])
            pos += 1
        return out

    prop = take("property: ")
    subject = take("subject: ")
    cons = tuple(take("cons-vars:").split())
    params = tuple((p.split()[0], float(p.split()[1]))
                   for p in take_all("param: "))
    positive = tuple(parse(e) for e in take_all("positive: "))
    nonzero = tuple(parse(e) for e in take_all("nonzero: "))
    nonneg = tuple(parse(e) for e in take_all("nonnegative: "))
    density = tuple(take_all("density-like: "))
    ctx = AssumptionContext(cons_vars=cons, params=params, positive=positive,
                            nonzero=nonzero, nonnegative=nonneg,
                            density_like=density)
    verdict = take("verdict: ")
    extra = tuple(parse(e) for e in take_all("extra: "))
    discharged = tuple(parse(e) for e in take_all("discharged-by: "))
    nsteps = int(take("steps: "))
    steps: list[Step] = []
    for _ in range(nsteps):
        head = lines[pos]
        pos += 1
        if head.startswith("rewrite "):
            _, rule, path_s = head.split(" ", 2)
            path = () if path_s == "root" else tuple(
                int(i) for i in path_s.split("."))
            before = parse(take("  before "))
            after = parse(take("  after "))
            steps.append(RewriteStep(rule, path, before, after))
        elif head.startswith("predicate "):
            fields = head.split()
            name = fields[1]
            kv = dict(f.split("=") for f in fields[2:])
            args = tuple(parse(take("  arg "))
                         for _ in range(int(kv["nargs"])))
            steps.append(PredicateStep(name, args, bool(int(kv["result"])),
                                       bool(int(kv["decisive"]))))
        elif head.startswith("limit "):
            _, var, point_s, val_s = head.split()
            expr = parse(take("  expr "))
            transformed = parse(take("  transformed "))
            reduced = parse(take("  reduced "))
            from .limits import INDETERMINATE
            value = (INDETERMINATE if val_s == "indeterminate"
                     else float(val_s))
            steps.append(LimitStep(LimitRecord(expr, var, float(point_s),
                                               transformed, reduced, value)))
        else:
            raise CertificateFormatError(f"unknown step record {head!r}")
    obligations = []
    while pos < len(lines) and lines[pos].startswith("obligation "):
        rel = lines[pos].split(" ", 1)[1]
        pos += 1
        lhs = parse(take("  lhs "))
        rhs = parse(take("  rhs "))
        obligations.append((rel, lhs, rhs))
    witness = None
    if pos < len(lines) and lines[pos].startswith("witness "):
        _, idx, lv, rv = lines[pos].split()
        pos += 1
        binds = tuple((f.split()[0], float(f.split()[1]))
                      for f in take_all("  bind "))
        witness = Witness(int(idx), binds, float(lv), float(rv))
    take("end")
    return ProofCertificate(prop, subject, ctx, tuple(steps), verdict,
                            extra=extra, obligations=tuple(obligations),
                            witness=witness, discharged_by=discharged)


# ---------------------------------------------------------------------------
# batch driver

SYSTEM_PROPERTIES = ("hyperbolicity", "strict-hyperbolicity", "cfl",
                     "lipschitz", "roe-hyperbolicity", "roe-strict",
                     "roe-conservation")
LIMITER_PROPERTIES = ("symmetry", "tvd")


def prove_property(prop: str, subject: str,
                   ctx: AssumptionContext | None = None) -> ProofCertificate:
    if prop == "hyperbolicity":
        return prove_lax_hyperbolicity(subject, False, ctx)
    if prop == "strict-hyperbolicity":
        return prove_lax_hyperbolicity(subject, True, ctx)
    if prop == "cfl":
        return prove_cfl_stability(subject, ctx)
    if prop == "lipschitz":
        return prove_lax_lipschitz(subject, ctx)
    if prop == "roe-hyperbolicity":
        return prove_roe_hyperbolicity(subject, False, ctx)
    if prop == "roe-strict":
        return prove_roe_hyperbolicity(subject, True, ctx)
    if prop == "roe-conservation":
        return prove_roe_conservation(subject, ctx)
    if prop == "symmetry":
        return prove_limiter_symmetry(subject)
    if prop == "tvd":
        return prove_limiter_tvd(subject)
    raise ValueError(f"unknown property {prop!r}")


def prove_all(system_names=None, limiter_names=None) -> list[ProofCertificate]:
    from .systems import BUILTIN_SYSTEMS, LIMITERS
    systems = system_names or sorted(BUILTIN_SYSTEMS)
    limiters = limiter_names or sorted(LIMITERS)
    certs = []
    for s in systems:
        for prop in SYSTEM_PROPERTIES:
            certs.append(prove_property(prop, s))
    for l in limiters:
        for prop in LIMITER_PROPERTIES:
            certs.append(prove_property(prop, l))
    return certs
