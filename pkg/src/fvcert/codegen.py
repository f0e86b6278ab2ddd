"""C source emission for generated finite-volume solvers.

Expressions print fully parenthesized with 17-significant-digit literals,
so the compiled arithmetic (with contraction disabled) follows the exact
evaluation order of the expression trees the provers reasoned about.
"""

from __future__ import annotations

from .expr import Expr, is_app, is_number, subst
from .schemes import (SolverConfig, dt_expr, halfstep_exprs,
                      interface_flux_exprs, slope_exprs, update_expr)
from .systems import PdeSystem, get_system, validate_system


class UnsupportedOperator(ValueError):
    pass


def _literal(x: float) -> str:
    s = f"{x:.17g}"
    if s.lstrip("-").isdigit():  # integral-looking: keep it a double literal
        s += ".0"
    if s.startswith("-"):
        return f"({s})"
    return s


_COMPARE_C = {"<": "<", "<=": "<=", ">": ">", ">=": ">=", "=": "=="}
_FN_C = {"abs": "fabs", "sqrt": "sqrt", "min": "fmin", "max": "fmax"}


def emit_expression(e: Expr) -> str:
    if is_number(e):
        return _literal(e)
    if isinstance(e, str):
        return e
    if not is_app(e):
        raise UnsupportedOperator(f"not an expression: {e!r}")
    op = e[0]
    if op in ("+", "*"):
        sep = f" {op} "
        return "(" + sep.join(emit_expression(k) for k in e[1:]) + ")"
    if op in ("-", "/"):
        return f"({emit_expression(e[1])} {op} {emit_expression(e[2])})"
    if op in _FN_C:
        args = ", ".join(emit_expression(k) for k in e[1:])
        return f"{_FN_C[op]}({args})"
    if op in _COMPARE_C:
        c = f"({emit_expression(e[1])} {_COMPARE_C[op]} {emit_expression(e[2])})"
        return f"({c} ? 1.0 : 0.0)"
    if op == "cond":
        test = e[1]
        if is_app(test) and test[0] in _COMPARE_C:
            t = (f"({emit_expression(test[1])} {_COMPARE_C[test[0]]} "
                 f"{emit_expression(test[2])})")
        else:
            t = f"({emit_expression(test)} != 0.0)"
        return f"({t} ? {emit_expression(e[2])} : {emit_expression(e[3])})"
    raise UnsupportedOperator(f"operator {op!r} has no C form")


# ---------------------------------------------------------------------------
# solver emission


def _fn(name: str, syms: list[str], expr: Expr) -> str:
    params = ", ".join(f"double {s}" for s in syms)
    silence = "".join(f"  (void) {s};\n" for s in syms)
    return (f"static double {name}({params}) {{\n{silence}"
            f"  return {emit_expression(expr)};\n}}\n")


def _call(name: str, args: list[str]) -> str:
    return f"{name}({', '.join(args)})"


_C_TEMPLATE = """\
/* generated finite volume solver -- do not edit */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include "system.h"

#define M (N_CELLS + 2 * NG)

static double U[NV][M];
static double UNEW[NV][M];
@WORK_ARRAYS@
static double FLX[NV][M];

@MATH_FUNCTIONS@

static void fill_ghosts(void) {
  for (int k = 0; k < NV; k++) {
    for (int g = 0; g < NG; g++) {
#if BC_PERIODIC
      U[k][g] = U[k][N_CELLS + g];
      U[k][N_CELLS + NG + g] = U[k][NG + g];
#else
      U[k][g] = U[k][NG];
      U[k][N_CELLS + NG + g] = U[k][N_CELLS + NG - 1];
#endif
    }
  }
}

static double max_speed(void) {
  double amax = 0.0;
  for (int i = NG; i < N_CELLS + NG; i++) {
@SPEED_FOLD@
  }
  return amax;
}

static void step(double dt) {
  fill_ghosts();
@FLUX_PHASE@
  for (int i = NG; i < N_CELLS + NG; i++) {
    for (int k = 0; k < NV; k++) {
      UNEW[k][i] = UPDATE_EXPR;
    }
  }
  for (int i = NG; i < N_CELLS + NG; i++)
    for (int k = 0; k < NV; k++)
      U[k][i] = UNEW[k][i];
}

static int state_finite(void) {
  for (int k = 0; k < NV; k++)
    for (int i = NG; i < N_CELLS + NG; i++)
      if (!isfinite(U[k][i])) return 0;
  return 1;
}

static void dump(double t, long step_no) {
  printf("# system=%s cells=%d t=%.17g step=%ld\\n",
         SYSTEM_NAME, N_CELLS, t, step_no);
  for (int i = 0; i < N_CELLS; i++) {
    double x = X_LO + (((double) i + 0.5) * DX);
    printf("%d,%.17g", i, x);
    for (int k = 0; k < NV; k++)
      printf(",%.17g", U[k][i + NG]);
    printf("\\n");
  }
}

static int read_state(const char *path) {
  FILE *f = fopen(path, "r");
  if (!f) return 0;
  char line[4096];
  int rows = 0;
  while (fgets(line, sizeof line, f)) {
    if (line[0] == '#' || line[0] == '\\n') continue;
    char *p = line;
    long idx = strtol(p, &p, 10);
    if (*p == ',') p++;
    strtod(p, &p); /* cell center, recomputed on output */
    for (int k = 0; k < NV; k++) {
      if (*p == ',') p++;
      U[k][idx + NG] = strtod(p, &p);
    }
    rows++;
  }
  fclose(f);
  return rows == N_CELLS;
}

int main(int argc, char **argv) {
  if (argc < 3) {
    fprintf(stderr, "usage: %s <init.csv> <t-end> [cadence]\\n", argv[0]);
    return 1;
  }
  if (!read_state(argv[1])) {
    fprintf(stderr, "bad initial state %s\\n", argv[1]);
    return 1;
  }
  double t_end = strtod(argv[2], 0);
  long cadence = argc > 3 ? strtol(argv[3], 0, 10) : 0;
  double t = 0.0;
  long step_no = 0;
  while (t < t_end) {
    fill_ghosts();
    double amax = max_speed();
    double dt = DT_EXPR;
    if (t + dt > t_end) dt = t_end - t;
    step(dt);
    t += dt;
    step_no++;
    if (!state_finite()) {
      fprintf(stderr, "non-finite state at step %ld\\n", step_no);
      return 3;
    }
    if (cadence > 0 && step_no % cadence == 0) dump(t, step_no);
  }
  dump(t, step_no);
  return 0;
}
"""

_ORDER2_ARRAYS = """\
static double SL[NV][M];
static double UFL[NV][M];
static double UFR[NV][M];
static double BL[NV][M];
static double BR[NV][M];
"""


def _state_args(cons, fmt: str) -> list[str]:
    return [fmt.format(k=k) for k in range(len(cons))]


def _flux_phase(system: PdeSystem, cfg: SolverConfig) -> str:
    cons = system.cons_vars
    nv = len(cons)
    if cfg.order == 1:
        calls = "\n".join(
            f"      FLX[{k}][j] = " + _call(
                f"iflux{k}",
                _state_args(cons, "U[{k}][j]")
                + _state_args(cons, "U[{k}][j + 1]") + ["DX", "dt"]) + ";"
            for k in range(nv))
        return (f"  for (int j = NG - 1; j < N_CELLS + NG; j++) {{\n"
                f"{calls}\n  }}")
    slope = "\n".join(
        f"      SL[{k}][i] = " + _call(
            f"slope{k}",
            [f"U[{k}][i - 1]", f"U[{k}][i]", f"U[{k}][i + 1]"]) + ";"
        for k in range(nv))
    extrap_l = "\n".join(
        f"      UFL[{k}][j] = U[{k}][j] + SL[{k}][j];" for k in range(nv))
    extrap_r = "\n".join(
        f"      UFR[{k}][j] = U[{k}][j + 1] - SL[{k}][j + 1];"
        for k in range(nv))
    half = "\n".join(
        f"      BL[{k}][j] = " + _call(
            f"half_left{k}",
            _state_args(cons, "UFL[{k}][j]")
            + _state_args(cons, "UFR[{k}][j - 1]") + ["DX", "dt"]) + ";\n"
        f"      BR[{k}][j] = " + _call(
            f"half_right{k}",
            _state_args(cons, "UFR[{k}][j]")
            + _state_args(cons, "UFL[{k}][j + 1]") + ["DX", "dt"]) + ";"
        for k in range(nv))
    flux = "\n".join(
        f"      FLX[{k}][j] = " + _call(
            f"iflux{k}",
            _state_args(cons, "BL[{k}][j]")
            + _state_args(cons, "BR[{k}][j]") + ["DX", "dt"]) + ";"
        for k in range(nv))
    return (f"  for (int i = 1; i < M - 1; i++) {{\n{slope}\n  }}\n"
            f"  for (int j = 1; j < M - 1; j++) {{\n{extrap_l}\n  }}\n"
            f"  for (int j = 0; j < M - 2; j++) {{\n{extrap_r}\n  }}\n"
            f"  for (int j = 1; j < M - 2; j++) {{\n{half}\n  }}\n"
            f"  for (int j = NG - 1; j < N_CELLS + NG; j++) {{\n{flux}\n  }}")


def emit_solver(system, cfg: SolverConfig) -> dict[str, str]:
    """Emit a standalone solver as {"system.h": ..., "solver.c": ...}."""
    system = get_system(system) if isinstance(system, str) else system
    validate_system(system)
    cfg.validate()
    cons = system.cons_vars
    nv = len(cons)
    grid = cfg.grid

    header = ["/* generated system constants -- do not edit */",
              f'#define SYSTEM_NAME "{system.name}"',
              f"#define NV {nv}",
              f"#define N_CELLS {grid.cells}",
              f"#define NG {cfg.ghosts}",
              f"#define X_LO {_literal(grid.lo)}",
              f"#define X_HI {_literal(grid.hi)}",
              f"#define DX ((X_HI - X_LO) / N_CELLS)",
              f"#define CFL {_literal(grid.cfl)}",
              f"#define BC_PERIODIC {1 if grid.bc == 'periodic' else 0}"]
    # parameters get a p_ prefix so names like "gamma" cannot collide
    # with libm identifiers
    pmap = {n: f"p_{n}" for n, _ in system.params}
    for n, v in system.params:
        header.append(f"static const double {pmap[n]} = {_literal(v)};")

    fns = []
    vl = [v + "_L" for v in cons]
    vr = [v + "_R" for v in cons]
    for k, s in enumerate(system.max_speeds):
        fns.append(_fn(f"speed{k}", list(cons), subst(s, pmap)))
    for k, f in enumerate(interface_flux_exprs(system, cfg.scheme)):
        fns.append(_fn(f"iflux{k}", vl + vr + ["dx", "dt"], subst(f, pmap)))
    if cfg.order == 2:
        for k, s in enumerate(slope_exprs(system, cfg.limiter)):
            v = cons[k]
            fns.append(_fn(f"slope{k}", [v + "_m", v + "_c", v + "_p"],
                           subst(s, pmap)))
        ve = [v + "_e" for v in cons]
        vo = [v + "_o" for v in cons]
        for k, h in enumerate(halfstep_exprs(system, "L")):
            fns.append(_fn(f"half_left{k}", ve + vo + ["dx", "dt"],
                           subst(h, pmap)))
        for k, h in enumerate(halfstep_exprs(system, "R")):
            fns.append(_fn(f"half_right{k}", ve + vo + ["dx", "dt"],
                           subst(h, pmap)))

    speed_fold = "\n".join(
        "    amax = fmax(amax, " + _call(
            f"speed{k}", _state_args(cons, "U[{k}][i]")) + ");"
        for k in range(len(system.max_speeds)))

    upd = emit_expression(subst(update_expr(), {
        "u": "U[k][i]", "fL": "FLX[k][i - 1]", "fR": "FLX[k][i]",
        "dx": "DX"}))
    dt_c = emit_expression(subst(dt_expr(), {"cfl": "CFL", "dx": "DX"}))

    src = (_C_TEMPLATE
           .replace("@WORK_ARRAYS@", _ORDER2_ARRAYS if cfg.order == 2 else "")
           .replace("@MATH_FUNCTIONS@", "\n".join(fns))
           .replace("@SPEED_FOLD@", speed_fold)
           .replace("@FLUX_PHASE@", _flux_phase(system, cfg))
           .replace("UPDATE_EXPR", upd)
           .replace("DT_EXPR", dt_c))
    return {"system.h": "\n".join(header) + "\n", "solver.c": src}
