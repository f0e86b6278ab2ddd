"""Native reference simulator.

Interprets the same scheme expression trees the C emitter splices, with
loop structure mirroring the generated solver statement for statement, so
a conformance run can demand agreement to the last few ulps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .expr import Expr, _fdiv, _fsqrt, is_app, is_number, subst
from .schemes import (SolverConfig, dt_expr, halfstep_exprs,
                      interface_flux_exprs, slope_exprs, update_expr)
from .systems import PdeSystem, SystemError, get_system, validate_system


class NonFiniteState(RuntimeError):
    def __init__(self, step: int):
        super().__init__(f"non-finite state at step {step}")
        self.step = step


# ---------------------------------------------------------------------------
# expression compilation: Expr -> python callable with identical association


def _py(e: Expr) -> str:
    if is_number(e):
        return f"({e!r})"
    if isinstance(e, str):
        if not e.isidentifier():
            raise SystemError(f"symbol {e!r} is not compilable")
        return e
    op = e[0]
    if op in ("+", "*"):
        return "(" + f" {op} ".join(_py(k) for k in e[1:]) + ")"
    if op == "-":
        return f"({_py(e[1])} - {_py(e[2])})"
    if op == "/":
        return f"_div({_py(e[1])}, {_py(e[2])})"
    if op == "abs":
        return f"fabs({_py(e[1])})"
    if op == "sqrt":
        return f"_sqrt({_py(e[1])})"
    if op == "min":
        return f"_fmin({_py(e[1])}, {_py(e[2])})"
    if op == "max":
        return f"_fmax({_py(e[1])}, {_py(e[2])})"
    if op == "cond":
        return f"({_py(e[2])} if {_py(e[1])} != 0.0 else {_py(e[3])})"
    if op == "=":
        return f"(1.0 if {_py(e[1])} == {_py(e[2])} else 0.0)"
    if op in ("<", "<=", ">", ">="):
        return f"(1.0 if {_py(e[1])} {op} {_py(e[2])} else 0.0)"
    raise SystemError(f"operator {op!r} is not compilable")


def _fmin(a: float, b: float) -> float:
    if math.isnan(a):
        return b
    if math.isnan(b):
        return a
    return min(a, b)


def _fmax(a: float, b: float) -> float:
    if math.isnan(a):
        return b
    if math.isnan(b):
        return a
    return max(a, b)


_NS = {"fabs": math.fabs, "_div": _fdiv, "_sqrt": _fsqrt,
       "_fmin": _fmin, "_fmax": _fmax, "__builtins__": {}}


def compile_expr(e: Expr, args: list[str]):
    """Compile to a positional-argument callable; binary64 arithmetic in
    the exact association of the tree."""
    src = f"lambda {', '.join(args)}: {_py(e)}"
    return eval(src, dict(_NS))


# ---------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class StepDiagnostics:
    time: float
    dt: float
    max_speed: float
    totals: tuple[float, ...]
    total_variation: float


@dataclass
class SimulationResult:
    system: PdeSystem
    config: SolverConfig
    time: float
    steps: int
    final_state: list[list[float]]  # [var][cell], interior only
    diagnostics: list[StepDiagnostics] = field(default_factory=list)

    def cell_centers(self) -> list[float]:
        g = self.config.grid
        return [g.lo + ((i + 0.5) * g.dx) for i in range(g.cells)]


def total_variation(state, periodic: bool = True) -> float:
    """Sum over variables of absolute inter-cell jumps (Eq.-style TV)."""
    tv = 0.0
    for u in state:
        n = len(u)
        for i in range(n - 1):
            tv += abs(u[i + 1] - u[i])
        if periodic:
            tv += abs(u[0] - u[n - 1])
    return tv


def convergence_order(errors) -> float:
    """Least-squares slope of log(error) against log(dx)."""
    pts = [(math.log(dx), math.log(err)) for dx, err in errors]
    n = len(pts)
    mx = sum(x for x, _ in pts) / n
    my = sum(y for _, y in pts) / n
    num = sum((x - mx) * (y - my) for x, y in pts)
    den = sum((x - mx) ** 2 for x, y in pts)
    return num / den


# ---------------------------------------------------------------------------
# the march


def _normalize_init(init, rank: int):
    if callable(init):
        def sample(x: float) -> tuple:
            u = init(x)
            if rank == 1 and isinstance(u, float):
                return (u,)
            return tuple(u)
        return sample
    fns = list(init)
    if len(fns) != rank:
        raise SystemError("one initial-condition function per variable")
    return lambda x: tuple(f(x) for f in fns)


class _Solver:
    """Compiled per-system/per-config kernel bundle."""

    def __init__(self, system: PdeSystem, cfg: SolverConfig):
        validate_system(system)
        cfg.validate()
        self.system, self.cfg = system, cfg
        cons = system.cons_vars
        pvals = {n: float(v) for n, v in system.params}

        def comp(e, args):
            return compile_expr(subst(e, pvals), args)

        vl = [v + "_L" for v in cons]
        vr = [v + "_R" for v in cons]
        self.speeds = [comp(s, list(cons)) for s in system.max_speeds]
        self.fluxes = [comp(f, vl + vr + ["dx", "dt"])
                       for f in interface_flux_exprs(system, cfg.scheme)]
        # the update and dt formulas mention no system parameters; skip the
        # parameter substitution so a parameter named "u" cannot capture
        # the state symbol
        self.update = compile_expr(
            subst(update_expr(), {"dx": float(cfg.grid.dx)}),
            ["u", "fL", "fR", "dt"])
        self.dt_of = compile_expr(
            subst(dt_expr(), {"cfl": cfg.grid.cfl,
                              "dx": float(cfg.grid.dx)}), ["amax"])
        if cfg.order == 2:
            self.slopes = [comp(s, [v + "_m", v + "_c", v + "_p"])
                           for v, s in zip(cons,
                                           slope_exprs(system, cfg.limiter))]
            ve = [v + "_e" for v in cons]
            vo = [v + "_o" for v in cons]
            self.half_l = [comp(h, ve + vo + ["dx", "dt"])
                           for h in halfstep_exprs(system, "L")]
            self.half_r = [comp(h, ve + vo + ["dx", "dt"])
                           for h in halfstep_exprs(system, "R")]

    def fill_ghosts(self, u) -> None:
        n, ng = self.cfg.grid.cells, self.cfg.ghosts
        for row in u:
            for g in range(ng):
                if self.cfg.grid.bc == "periodic":
                    row[g] = row[n + g]
                    row[n + ng + g] = row[ng + g]
                else:
                    row[g] = row[ng]
                    row[n + ng + g] = row[n + ng - 1]

    def max_speed(self, u) -> float:
        n, ng = self.cfg.grid.cells, self.cfg.ghosts
        nv = self.system.rank
        amax = 0.0
        for i in range(ng, n + ng):
            cell = [u[k][i] for k in range(nv)]
            for s in self.speeds:
                amax = _fmax(amax, s(*cell))
        return amax

    def step(self, u, dt: float) -> None:
        self.fill_ghosts(u)
        n, ng = self.cfg.grid.cells, self.cfg.ghosts
        nv = self.system.rank
        dx = self.cfg.grid.dx
        m = n + 2 * ng
        if self.cfg.order == 1:
            left, right = u, u
        else:
            sl = [[0.0] * m for _ in range(nv)]
            ufl = [[0.0] * m for _ in range(nv)]
            ufr = [[0.0] * m for _ in range(nv)]
            bl = [[0.0] * m for _ in range(nv)]
            br = [[0.0] * m for _ in range(nv)]
            for i in range(1, m - 1):
                for k in range(nv):
                    sl[k][i] = self.slopes[k](u[k][i - 1], u[k][i],
                                              u[k][i + 1])
            for j in range(1, m - 1):
                for k in range(nv):
                    ufl[k][j] = u[k][j] + sl[k][j]
            for j in range(m - 2):
                for k in range(nv):
                    ufr[k][j] = u[k][j + 1] - sl[k][j + 1]
            for j in range(1, m - 2):
                own_l = [ufl[k][j] for k in range(nv)]
                opp_l = [ufr[k][j - 1] for k in range(nv)]
                own_r = [ufr[k][j] for k in range(nv)]
                opp_r = [ufl[k][j + 1] for k in range(nv)]
                for k in range(nv):
                    bl[k][j] = self.half_l[k](*own_l, *opp_l, dx, dt)
                    br[k][j] = self.half_r[k](*own_r, *opp_r, dx, dt)
            left, right = bl, br
        flx = [[0.0] * m for _ in range(nv)]
        for j in range(ng - 1, n + ng):
            if self.cfg.order == 1:
                lv = [left[k][j] for k in range(nv)]
                rv = [right[k][j + 1] for k in range(nv)]
            else:
                lv = [left[k][j] for k in range(nv)]
                rv = [right[k][j] for k in range(nv)]
            for k in range(nv):
                flx[k][j] = self.fluxes[k](*lv, *rv, dx, dt)
        for i in range(ng, n + ng):
            for k in range(nv):
                u[k][i] = self.update(u[k][i], flx[k][i - 1], flx[k][i], dt)


def run(system, cfg: SolverConfig, init, t_end: float, *,
        record: bool = True, max_steps: int = 1_000_000) -> SimulationResult:
    """March the conservative update to t_end (final step clipped)."""
    system = get_system(system) if isinstance(system, str) else system
    if not t_end > 0.0:
        raise SystemError("t-end must be positive")
    solver = _Solver(system, cfg)
    grid, ng, nv = cfg.grid, cfg.ghosts, system.rank
    sample = _normalize_init(init, nv)
    m = grid.cells + 2 * ng
    u = [[0.0] * m for _ in range(nv)]
    for i in range(grid.cells):
        x = grid.lo + ((i + 0.5) * grid.dx)
        vals = sample(x)
        for k in range(nv):
            u[k][i + ng] = float(vals[k])
    t, nstep = 0.0, 0
    diags: list[StepDiagnostics] = []
    while t < t_end:
        if nstep >= max_steps:
            raise SystemError(f"exceeded {max_steps} steps before t-end")
        solver.fill_ghosts(u)
        amax = solver.max_speed(u)
        dt = solver.dt_of(amax)
        if t + dt > t_end:
            dt = t_end - t
        solver.step(u, dt)
        t += dt
        nstep += 1
        interior = [row[ng:grid.cells + ng] for row in u]
        for row in interior:
            for v in row:
                if not math.isfinite(v):
                    raise NonFiniteState(nstep)
        if record:
            diags.append(StepDiagnostics(
                t, dt, amax,
                tuple(math.fsum(row) for row in interior),
                total_variation(interior, grid.bc == "periodic")))
    final = [row[ng:grid.cells + ng] for row in u]
    return SimulationResult(system, cfg, t, nstep, final, diags)


# ---------------------------------------------------------------------------
# state dumps (shared CSV schema with the generated C solvers)


def write_statedump(result_or_state, *, system_name: str | None = None,
                    grid=None, t: float = 0.0, step: int = 0) -> str:
    if isinstance(result_or_state, SimulationResult):
        res = result_or_state
        state, grid = res.final_state, res.config.grid
        system_name, t, step = res.system.name, res.time, res.steps
    else:
        state = result_or_state
        if grid is None or system_name is None:
            raise SystemError("state dumps need a grid and a system name")
    n = len(state[0])
    lines = [f"# system={system_name} cells={n} t={t:.17g} step={step}"]
    for i in range(n):
        x = grid.lo + ((i + 0.5) * grid.dx)
        row = [str(i), f"{x:.17g}"] + [f"{u[i]:.17g}" for u in state]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def parse_statedump(text: str) -> tuple[dict, list[list[float]]]:
    """Returns (header fields, per-variable value columns)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("# "):
        raise SystemError("missing state dump header")
    meta = {}
    for tok in lines[0][2:].split():
        key, val = tok.split("=", 1)
        meta[key] = val
    meta["cells"] = int(meta["cells"])
    meta["t"] = float(meta["t"])
    meta["step"] = int(meta["step"])
    rows = [[float(v) for v in ln.split(",")] for ln in lines[1:]]
    if len(rows) != meta["cells"]:
        raise SystemError("row count does not match header cell count")
    nv = len(rows[0]) - 2
    cols = [[r[2 + k] for r in rows] for k in range(nv)]
    return meta, cols
