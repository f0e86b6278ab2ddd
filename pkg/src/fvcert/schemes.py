"""Symbolic assembly of finite-volume schemes.

The inter-cell flux, MUSCL extrapolation, and update formulas are built
here as expression trees over suffixed state symbols.  Both the C emitter
and the native simulator consume these same trees, so the two always
perform identical binary64 arithmetic in identical order.

Symbol conventions:
  <var>_L, <var>_R      states either side of an interface
  <var>_m, <var>_c, <var>_p   three-cell stencil for slope limiting
  <var>_e, <var>_o      own / opposite extrapolated states in the
                        half-step evolution
  dx, dt, amax          grid spacing, time step, max signal speed
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .analysis import AssumptionContext
from .calculus import differentiate
from .expr import Expr, subst
from .rules import simplify
from .systems import GridSpec, PdeSystem, SystemError, default_context, get_limiter


@dataclass(frozen=True)
class SolverConfig:
    scheme: str = "lax-friedrichs"
    order: int = 1
    limiter: str | None = None
    grid: GridSpec = field(default_factory=GridSpec)

    def validate(self) -> None:
        if self.scheme not in ("lax-friedrichs", "roe"):
            raise SystemError(f"unknown scheme {self.scheme!r}")
        if self.order not in (1, 2):
            raise SystemError(f"order must be 1 or 2, got {self.order}")
        if self.order == 2 and not self.limiter:
            raise SystemError("second-order schemes need a flux limiter")
        if self.order == 1 and self.limiter:
            raise SystemError("first-order schemes take no limiter")
        if self.limiter:
            get_limiter(self.limiter)
        self.grid.validate()

    @property
    def ghosts(self) -> int:
        return self.order


def _suffixed(e: Expr, names: tuple[str, ...], suffix: str) -> Expr:
    return subst(e, {v: v + suffix for v in names})


def _roe_hooks(system: PdeSystem) -> dict:
    ctx = default_context(system)
    cons = system.cons_vars
    nz = []
    for e in ctx.nonzero:
        if isinstance(e, str) and e in cons:
            nz.extend((e + "_L", e + "_R"))
        else:
            nz.append(e)
    rctx = AssumptionContext(
        cons_vars=tuple(v + s for s in ("_L", "_R") for v in cons),
        params=ctx.params, nonzero=tuple(nz))
    return rctx.hooks()


def roe_matrix_exprs(system: PdeSystem) -> list[list[Expr]]:
    """Arithmetic-average Roe matrix over <var>_L / <var>_R symbols."""
    cons = system.cons_vars
    hooks = _roe_hooks(system)
    out = []
    for f in system.flux:
        row = []
        for v in cons:
            j = differentiate(f, v)
            row.append(simplify(("*", 0.5, ("+", _suffixed(j, cons, "_L"),
                                            _suffixed(j, cons, "_R"))),
                                **hooks))
        out.append(row)
    return out


def _eigs2_exprs(matrix, hooks) -> tuple[Expr, Expr]:
    (a, b), (c, d) = matrix
    disc = ("+", ("*", 4.0, ("*", b, c)), ("*", ("-", a, d), ("-", a, d)))
    tr, root = ("+", a, d), ("sqrt", disc)
    return (simplify(("*", 0.5, ("-", tr, root)), **hooks),
            simplify(("*", 0.5, ("+", tr, root)), **hooks))


def _mean_flux(system: PdeSystem, k: int) -> Expr:
    cons = system.cons_vars
    f = system.flux[k]
    return ("*", 0.5, ("+", _suffixed(f, cons, "_L"),
                       _suffixed(f, cons, "_R")))


def lax_flux_exprs(system: PdeSystem) -> list[Expr]:
    """Lax-Friedrichs interface flux:
    0.5 (F_L + F_R) - (dx / 2 dt) (U_R - U_L), componentwise."""
    out = []
    for k, v in enumerate(system.cons_vars):
        visc = ("*", ("/", "dx", ("*", 2.0, "dt")),
                ("-", v + "_R", v + "_L"))
        out.append(("-", _mean_flux(system, k), visc))
    return out


def roe_flux_exprs(system: PdeSystem) -> list[Expr]:
    """Roe interface flux 0.5 (F_L + F_R) - 0.5 sum_p |lambda_p| alpha_p r_p
    with the wave strengths alpha_p from closed-form inversion of the
    eigenvector matrix of the averaged Jacobian."""
    cons = system.cons_vars
    du = [("-", v + "_R", v + "_L") for v in cons]
    matrix = roe_matrix_exprs(system)
    if system.rank == 1:
        upwind = ("*", 0.5, ("*", ("abs", matrix[0][0]), du[0]))
        return [("-", _mean_flux(system, 0), upwind)]
    (a, b), (c, d) = matrix
    if b == 0.0 and c == 0.0:
        # diagonal average: each component upwinds on its own speed
        return [("-", _mean_flux(system, k),
                 ("*", 0.5, ("*", ("abs", matrix[k][k]), du[k])))
                for k in range(2)]
    hooks = _roe_hooks(system)
    lam1, lam2 = _eigs2_exprs(matrix, hooks)
    if b != 0.0:
        r1 = (b, ("-", lam1, a))
        r2 = (b, ("-", lam2, a))
    else:
        r1 = (("-", lam1, d), c)
        r2 = (("-", lam2, d), c)
    det = ("-", ("*", r1[0], r2[1]), ("*", r2[0], r1[1]))
    alpha1 = ("/", ("-", ("*", r2[1], du[0]), ("*", r2[0], du[1])), det)
    alpha2 = ("/", ("-", ("*", r1[0], du[1]), ("*", r1[1], du[0])), det)
    out = []
    for k in range(2):
        waves = ("+", ("*", ("abs", lam1), ("*", alpha1, r1[k])),
                 ("*", ("abs", lam2), ("*", alpha2, r2[k])))
        out.append(("-", _mean_flux(system, k), ("*", 0.5, waves)))
    return out


def interface_flux_exprs(system: PdeSystem, scheme: str) -> list[Expr]:
    if scheme == "lax-friedrichs":
        return lax_flux_exprs(system)
    if scheme == "roe":
        return roe_flux_exprs(system)
    raise SystemError(f"unknown scheme {scheme!r}")


def slope_exprs(system: PdeSystem, limiter: str) -> list[Expr]:
    """Limited half-slope 0.5 phi(r) (U_p - U_c) per variable over a
    three-cell stencil; the gradient ratio r = (U_c - U_m)/(U_p - U_c)
    is pinned to 1 across flat jumps so constant data stays constant."""
    phi = get_limiter(limiter)
    out = []
    for v in system.cons_vars:
        dn = ("-", v + "_p", v + "_c")
        dm = ("-", v + "_c", v + "_m")
        r = ("cond", ("=", dn, 0.0), 1.0, ("/", dm, dn))
        out.append(("*", 0.5, ("*", subst(phi, {"r": r}), dn)))
    return out


def halfstep_exprs(system: PdeSystem, side: str) -> list[Expr]:
    """Half-step evolution of an extrapolated interface state.

    side "L": own state is the left extrapolant, opposite is the right
    extrapolant of the previous interface; the flux difference runs
    F(opposite) - F(own).  side "R" is the mirror image.
    """
    cons = system.cons_vars
    coef = ("/", "dt", ("*", 2.0, "dx"))
    out = []
    for k, v in enumerate(cons):
        fe = _suffixed(system.flux[k], cons, "_e")
        fo = _suffixed(system.flux[k], cons, "_o")
        dfl = ("-", fo, fe) if side == "L" else ("-", fe, fo)
        out.append(("+", v + "_e", ("*", coef, dfl)))
    return out


def update_expr() -> Expr:
    """Conservative update: u - (dt/dx) (F_right - F_left)."""
    return ("-", "u", ("*", ("/", "dt", "dx"), ("-", "fR", "fL")))


def dt_expr() -> Expr:
    """CFL time step: cfl * dx / amax."""
    return ("/", ("*", "cfl", "dx"), "amax")
