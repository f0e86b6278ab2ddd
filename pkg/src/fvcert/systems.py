"""Hyperbolic system definitions: builtins, flux limiters, the text
grammar, and validation."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .analysis import AssumptionContext
from .expr import Expr, ExprError, is_app, parse, symbols_of, to_text, validate


class SystemError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    cells: int = 100
    lo: float = 0.0
    hi: float = 1.0
    bc: str = "periodic"
    cfl: float = 0.9

    def validate(self) -> None:
        if self.cells < 4:
            raise SystemError(f"need at least 4 cells, got {self.cells}")
        if not self.lo < self.hi:
            raise SystemError("grid lo must be below hi")
        if self.bc not in ("periodic", "copy"):
            raise SystemError(f"unknown boundary condition {self.bc!r}")
        if not 0.0 < self.cfl <= 1.0:
            raise SystemError(f"cfl must lie in (0, 1], got {self.cfl}")

    @property
    def dx(self) -> float:
        return (self.hi - self.lo) / self.cells


@dataclass(frozen=True)
class PdeSystem:
    name: str
    cons_vars: tuple[str, ...]
    flux: tuple[Expr, ...]
    max_speeds: tuple[Expr, ...]
    params: tuple[tuple[str, float], ...] = ()
    grid: GridSpec = field(default_factory=GridSpec)

    @property
    def rank(self) -> int:
        return len(self.cons_vars)

    def param_dict(self) -> dict[str, float]:
        return dict(self.params)

    def domain_nonzero(self) -> tuple[str, ...]:
        """Symbols the flux divides by; the flux is only defined where
        these are non-zero, so proofs may assume as much."""
        out: list[str] = []

        def walk(e: Expr):
            if is_app(e):
                if e[0] == "/" and isinstance(e[2], str) and e[2] not in out:
                    out.append(e[2])
                for sub in e[1:]:
                    walk(sub)

        for f in self.flux + self.max_speeds:
            walk(f)
        return tuple(out)


def default_context(system: PdeSystem) -> AssumptionContext:
    nz = system.domain_nonzero()
    return AssumptionContext(
        cons_vars=system.cons_vars,
        params=system.params,
        nonzero=tuple(nz),
        density_like=tuple(s for s in nz if s in system.cons_vars),
    )


def validate_system(system: PdeSystem,
                    ctx: AssumptionContext | None = None) -> bool:
    """Check well-formedness; raises SystemError on failure."""
    if not system.name:
        raise SystemError("system needs a name")
    if not system.cons_vars:
        raise SystemError("system needs at least one conserved variable")
    if len(set(system.cons_vars)) != len(system.cons_vars):
        raise SystemError("duplicate conserved variable names")
    if len(system.flux) != system.rank:
        raise SystemError("flux arity must match the conserved variables")
    if len(system.max_speeds) != system.rank:
        raise SystemError("max-speed arity must match the conserved variables")
    pnames = [n for n, _ in system.params]
    if len(set(pnames)) != len(pnames):
        raise SystemError("duplicate parameter names")
    clash = set(system.cons_vars) & set(pnames)
    if clash:
        raise SystemError(f"symbols both conserved and parameter: {clash}")
    allowed = set(system.cons_vars) | set(pnames)
    ctx = ctx or default_context(system)
    for label, exprs in (("flux", system.flux), ("max-speed", system.max_speeds)):
        for e in exprs:
            validate(e)
            free = symbols_of(e) - allowed
            if free:
                raise SystemError(f"{label} uses undeclared symbols {free}")
            if not ctx.is_real(e):
                raise SystemError(
                    f"{label} component {to_text(e)} is not provably real")
    system.grid.validate()
    return True


# ---------------------------------------------------------------------------
# builtin systems


def _sys(name, cons, flux, speeds, params=(), grid=None):
    return PdeSystem(name=name, cons_vars=tuple(cons),
                     flux=tuple(parse(f) for f in flux),
                     max_speeds=tuple(parse(s) for s in speeds),
                     params=tuple(params), grid=grid or GridSpec())


def _builtins() -> dict[str, PdeSystem]:
    c2 = "(* (* c c)"
    table = {
        "linear-advection": _sys(
            "linear-advection", ["u"], ["(* a u)"], ["(abs a)"],
            [("a", 1.0)]),
        "inviscid-burgers": _sys(
            "inviscid-burgers", ["u"], ["(* 0.5 (* u u))"], ["(abs u)"]),
        "maxwell-ey-bz": _sys(
            "maxwell-ey-bz", ["Ey", "Bz"],
            [f"{c2} Bz)", "Ey"], ["(abs c)", "(abs c)"], [("c", 1.0)]),
        "maxwell-ez-by": _sys(
            "maxwell-ez-by", ["Ez", "By"],
            [f"(* -1.0 {c2} By))", "(* -1.0 Ez)"],
            ["(abs c)", "(abs c)"], [("c", 1.0)]),
        "maxwell-ex-phi": _sys(
            "maxwell-ex-phi", ["Ex", "phi"],
            [f"(* chi {c2} phi))", "(* chi Ex)"],
            ["(abs (* chi c))", "(abs (* chi c))"],
            [("c", 1.0), ("chi", 1.0)]),
        "maxwell-bx-psi": _sys(
            "maxwell-bx-psi", ["Bx", "psi"],
            ["(* gamma psi)", f"(* gamma {c2} Bx))"],
            ["(abs (* gamma c))", "(abs (* gamma c))"],
            [("c", 1.0), ("gamma", 1.0)]),
        "isothermal-euler": _sys(
            "isothermal-euler", ["rho", "mom"],
            ["mom", "(+ (/ (* mom mom) rho) (* rho (* vt vt)))"],
            ["(abs (- (/ mom rho) vt))", "(abs (+ (/ mom rho) vt))"],
            [("vt", 1.0)]),
        "isothermal-euler-transverse": _sys(
            "isothermal-euler-transverse", ["rhov", "rhow"],
            ["(* u rhov)", "(* u rhow)"], ["(abs u)", "(abs u)"],
            [("u", 1.0)]),
    }
    return table


BUILTIN_SYSTEMS = _builtins()


def get_system(name: str) -> PdeSystem:
    try:
        return BUILTIN_SYSTEMS[name]
    except KeyError:
        raise SystemError(f"unknown system {name!r}; "
                          f"known: {', '.join(sorted(BUILTIN_SYSTEMS))}") from None


# ---------------------------------------------------------------------------
# flux limiters (bodies in the ratio symbol r)


LIMITERS: dict[str, Expr] = {
    "minmod": parse("(max 0.0 (min 1.0 r))"),
    "monotonized-centered": parse(
        "(max 0.0 (min (min (* 2.0 r) (* 0.5 (+ 1.0 r))) 2.0))"),
    "superbee": parse("(max (max 0.0 (min (* 2.0 r) 1.0)) (min r 2.0))"),
    "van-leer": parse("(/ (+ r (abs r)) (+ 1.0 (abs r)))"),
}


def get_limiter(name: str) -> Expr:
    try:
        return LIMITERS[name]
    except KeyError:
        raise SystemError(f"unknown limiter {name!r}; "
                          f"known: {', '.join(sorted(LIMITERS))}") from None


# ---------------------------------------------------------------------------
# text grammar
#
#   name: <identifier>
#   cons: (<sym> ...)
#   flux: (<expr> ...)
#   max-speed: (<expr> ...)
#   param: <sym> = <float>
#   grid: cells=<n> lo=<f> hi=<f> bc=<periodic|copy> cfl=<f>
#
# '#' starts a comment; param and grid lines are optional.


def _parse_expr_list(raw: str) -> list[Expr]:
    raw = raw.strip()
    if not raw.startswith("(") or not raw.endswith(")"):
        raise SystemError(f"expected a parenthesized list, got {raw!r}")
    inner = raw[1:-1].strip()
    items: list[Expr] = []
    depth = 0
    start = 0
    i = 0
    while i < len(inner):
        c = inner[i]
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
            if depth < 0:
                raise SystemError(f"unbalanced parens in {raw!r}")
        elif c.isspace() and depth == 0:
            chunk = inner[start:i].strip()
            if chunk:
                items.append(parse(chunk))
            start = i + 1
        i += 1
    chunk = inner[start:].strip()
    if chunk:
        if depth != 0:
            raise SystemError(f"unbalanced parens in {raw!r}")
        items.append(parse(chunk))
    return items


def parse_system(text: str) -> PdeSystem:
    fields: dict = {"param": []}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise SystemError(f"line {lineno}: expected 'key: value'")
        key, _, val = line.partition(":")
        key, val = key.strip(), val.strip()
        if key == "name":
            fields["name"] = val
        elif key == "cons":
            fields["cons"] = _parse_expr_list(val)
        elif key in ("flux", "max-speed"):
            fields[key] = _parse_expr_list(val)
        elif key == "param":
            sym, _, num = val.partition("=")
            sym = sym.strip()
            try:
                fields["param"].append((sym, float(num.strip())))
            except ValueError:
                raise SystemError(f"line {lineno}: bad parameter value") from None
        elif key == "grid":
            kv = {}
            for tokenpair in val.split():
                k, _, v = tokenpair.partition("=")
                kv[k] = v
            try:
                fields["grid"] = GridSpec(
                    cells=int(kv.get("cells", 100)),
                    lo=float(kv.get("lo", 0.0)),
                    hi=float(kv.get("hi", 1.0)),
                    bc=kv.get("bc", "periodic"),
                    cfl=float(kv.get("cfl", 0.9)))
            except ValueError:
                raise SystemError(f"line {lineno}: bad grid entry") from None
        else:
            raise SystemError(f"line {lineno}: unknown key {key!r}")
    for req in ("name", "cons", "flux", "max-speed"):
        if req not in fields:
            raise SystemError(f"missing required field {req!r}")
    cons = []
    for s in fields["cons"]:
        if not isinstance(s, str):
            raise SystemError("cons entries must be symbols")
        cons.append(s)
    system = PdeSystem(
        name=fields["name"], cons_vars=tuple(cons),
        flux=tuple(fields["flux"]), max_speeds=tuple(fields["max-speed"]),
        params=tuple(fields["param"]),
        grid=fields.get("grid", GridSpec()))
    validate_system(system)
    return system


def system_to_text(system: PdeSystem) -> str:
    lines = [
        f"name: {system.name}",
        "cons: (" + " ".join(system.cons_vars) + ")",
        "flux: (" + " ".join(to_text(f) for f in system.flux) + ")",
        "max-speed: (" + " ".join(to_text(s) for s in system.max_speeds) + ")",
    ]
    for n, v in system.params:
        lines.append(f"param: {n} = {v!r}")
    g = system.grid
    lines.append(f"grid: cells={g.cells} lo={g.lo!r} hi={g.hi!r} "
                 f"bc={g.bc} cfl={g.cfl!r}")
    return "\n".join(lines) + "\n"
