"""Command line front door.

Exit codes form a stable contract: 0 for Proved or plain success, 2 for
NotProved (the prover worked, the property is unproven), 1 for operational
errors.  Operational errors print one machine-parsable line to stderr of
the form ``fvcert: <category>: <message>``.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import math
import os
import sys

from .expr import ExprError, NonTermination, to_text
from .prover import (CertificateFormatError, LIMITER_PROPERTIES,
                     SYSTEM_PROPERTIES, check_certificate, parse_certificate,
                     prove_property, serialize_certificate)
from .schemes import SolverConfig
from .simulate import (NonFiniteState, convergence_order, run,
                       total_variation, write_statedump)
from .systems import (BUILTIN_SYSTEMS, GridSpec, LIMITERS, SystemError,
                      default_context, get_system)
from .codegen import emit_solver

SYSTEM_ALIASES = {
    "isothermal-euler-dens-mom": "isothermal-euler",
    "isothermal-euler-trans-mom": "isothermal-euler-transverse",
}
LIMITER_ALIASES = {"mc": "monotonized-centered"}
SCHEME_ALIASES = {"lax": "lax-friedrichs"}

ALL_PROPERTIES = SYSTEM_PROPERTIES + LIMITER_PROPERTIES


class CliError(Exception):
    def __init__(self, category: str, message: str):
        super().__init__(message)
        self.category = category


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; 2 is reserved for NotProved
    def error(self, message):
        raise CliError("usage", message)


def _system_name(name: str) -> str:
    name = SYSTEM_ALIASES.get(name, name)
    get_system(name)
    return name


def _limiter_name(name: str) -> str:
    name = LIMITER_ALIASES.get(name, name)
    if name not in LIMITERS:
        raise CliError("usage", f"unknown limiter {name!r}; "
                       f"known: {', '.join(sorted(LIMITERS))}")
    return name


def _grid_from(args) -> GridSpec:
    return GridSpec(cells=args.cells, lo=args.lo, hi=args.hi,
                    bc=args.bc, cfl=args.cfl)


def _config_from(args) -> SolverConfig:
    scheme = SCHEME_ALIASES.get(args.scheme, args.scheme)
    limiter = _limiter_name(args.limiter) if args.limiter else None
    cfg = SolverConfig(scheme=scheme, order=args.order, limiter=limiter,
                       grid=_grid_from(args))
    cfg.validate()
    return cfg


def _add_grid_flags(p):
    p.add_argument("--cells", type=int, default=100)
    p.add_argument("--lo", type=float, default=0.0)
    p.add_argument("--hi", type=float, default=1.0)
    p.add_argument("--bc", choices=("periodic", "copy"), default="periodic")
    p.add_argument("--cfl", type=float, default=0.9)


def _add_scheme_flags(p):
    p.add_argument("--scheme", default="lax-friedrichs")
    p.add_argument("--order", type=int, choices=(1, 2), default=1)
    p.add_argument("--limiter")


# ---------------------------------------------------------------------------
# subcommands


def cmd_list(args) -> int:
    print("systems:")
    for name in sorted(BUILTIN_SYSTEMS):
        s = BUILTIN_SYSTEMS[name]
        params = " ".join(f"{k}={v:g}" for k, v in s.params)
        extra = f"  [{params}]" if params else ""
        print(f"  {name}: vars=({', '.join(s.cons_vars)}){extra}")
    print("limiters:")
    for name in sorted(LIMITERS):
        print(f"  {name}: phi(r) = {to_text(LIMITERS[name])}")
    return 0


def _parse_assume(entries, ctx):
    for entry in entries or ():
        kind, _, sym = entry.partition(":")
        if not sym or kind not in ("positive", "nonzero"):
            raise CliError("usage", f"bad --assume {entry!r}; expected "
                           "positive:<symbol> or nonzero:<symbol>")
        ctx = (ctx.with_positive(sym) if kind == "positive"
               else ctx.with_nonzero(sym))
    return ctx


def _print_certificate_summary(cert) -> None:
    print(f"goal: {cert.goal}")
    print(f"verdict: {cert.verdict}")
    print(f"steps: {cert.step_count}")
    if cert.discharged_by:
        print(f"dischargeable-by: positivity of {', '.join(cert.discharged_by)}")
    for rel, lhs, rhs in cert.obligations:
        print(f"obligation: {to_text(lhs)} {rel} {to_text(rhs)}")
    if cert.witness is not None:
        binds = " ".join(f"{s}={v:.6g}" for s, v in cert.witness.bindings)
        print(f"witness: obligation {cert.witness.obligation + 1} fails at "
              f"{binds}")


def cmd_prove(args) -> int:
    if bool(args.system) == bool(args.limiter):
        raise CliError("usage", "give exactly one of --system or --limiter")
    if args.system:
        subject = _system_name(args.system)
        if args.property not in SYSTEM_PROPERTIES:
            raise CliError("usage", f"property {args.property!r} applies to "
                           "limiters, not systems")
        ctx = _parse_assume(args.assume, default_context(get_system(subject)))
        cert = prove_property(args.property, subject, ctx)
    else:
        subject = _limiter_name(args.limiter)
        if args.property not in LIMITER_PROPERTIES:
            raise CliError("usage", f"property {args.property!r} applies to "
                           "systems, not limiters")
        if args.assume:
            raise CliError("usage", "--assume applies to system goals only")
        cert = prove_property(args.property, subject)
    _print_certificate_summary(cert)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(serialize_certificate(cert))
        print(f"certificate: {args.out}")
    return 0 if cert.verdict in ("Proved", "ProvedConditional") else 2


def cmd_check(args) -> int:
    try:
        with open(args.certificate) as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError("io", str(exc)) from None
    cert = parse_certificate(text)
    result = check_certificate(cert)
    if result:
        print(f"certificate ok: {cert.goal} verdict={cert.verdict} "
              f"steps={cert.step_count}")
        return 0
    print(f"fvcert: certificate: step {result.failing_step}: "
          f"{result.reason}", file=sys.stderr)
    return 1


def cmd_codegen(args) -> int:
    system = get_system(_system_name(args.system))
    cfg = _config_from(args)
    files = emit_solver(system, cfg)
    os.makedirs(args.out, exist_ok=True)
    for name, text in files.items():
        path = os.path.join(args.out, name)
        with open(path, "w") as fh:
            fh.write(text)
        print(path)
    return 0


def _preset_init(name: str, rank: int):
    # value columns beyond the first start at rest; the leading variable is
    # kept strictly positive so density-like systems stay in-domain
    def lead(f):
        return lambda x: (f(x),) + (0.0,) * (rank - 1)
    if name == "sine":
        return lead(lambda x: 0.5 + 0.25 * math.sin(2.0 * math.pi * x))
    if name == "square":
        return lead(lambda x: 1.0 if 0.25 <= x < 0.75 else 0.5)
    if name == "riemann":
        return lead(lambda x: 1.0 if x < 0.5 else 0.125)
    raise CliError("usage", f"unknown init preset {name!r}; "
                   "known: sine, square, riemann")


def cmd_simulate(args) -> int:
    system = get_system(_system_name(args.system))
    cfg = _config_from(args)
    init = _preset_init(args.init, system.rank)
    try:
        res = run(system, cfg, init, args.t_end)
    except NonFiniteState as exc:
        raise CliError("simulation", str(exc)) from None
    totals = " ".join(f"{v}={t:.12g}"
                      for v, t in zip(system.cons_vars,
                                      res.diagnostics[-1].totals))
    print(f"system: {system.name}  scheme: {cfg.scheme}  order: {cfg.order}")
    print(f"steps: {res.steps}  t: {res.time:.12g}")
    print(f"totals: {totals}")
    print(f"total-variation: {res.diagnostics[-1].total_variation:.12g}")
    if args.dump:
        with open(args.dump, "w") as fh:
            fh.write(write_statedump(res))
        print(f"dump: {args.dump}")
    return 0


def _study_convergence(args) -> int:
    # advect one full period on the unit interval; the exact solution is
    # then the initial profile itself
    system = get_system("linear-advection")
    init = _preset_init("sine", system.rank)
    errors = []
    for cells in (64, 128, 256, 512):
        cfg = SolverConfig(scheme=SCHEME_ALIASES.get(args.scheme, args.scheme),
                           order=args.order,
                           limiter=_limiter_name(args.limiter)
                           if args.limiter else None,
                           grid=GridSpec(cells=cells, cfl=args.cfl))
        cfg.validate()
        res = run(system, cfg, init, 1.0, record=False)
        dx = cfg.grid.dx
        err = sum(abs(res.final_state[0][i] - init(res.cell_centers()[i])[0])
                  for i in range(cells)) * dx
        errors.append((dx, err))
        print(f"cells={cells} l1-error={err:.6e}")
    slope = convergence_order(errors)
    print(f"slope={slope:.4f}")
    return 0


def _study_tv(args) -> int:
    system = get_system("inviscid-burgers")
    cfg = SolverConfig(scheme=SCHEME_ALIASES.get(args.scheme, args.scheme),
                       order=args.order,
                       limiter=_limiter_name(args.limiter)
                       if args.limiter else None,
                       grid=GridSpec(cells=args.cells, cfl=args.cfl))
    cfg.validate()
    res = run(system, cfg, _preset_init("riemann", system.rank), 0.3)
    tv0 = total_variation([[_preset_init("riemann", 1)(x)[0]
                            for x in res.cell_centers()]])
    worst = -math.inf
    prev = tv0
    for d in res.diagnostics:
        worst = max(worst, d.total_variation - prev)
        prev = d.total_variation
    print(f"steps: {res.steps}")
    print(f"tv-initial: {tv0:.12g}")
    print(f"tv-final: {res.diagnostics[-1].total_variation:.12g}")
    print(f"max-per-step-increase: {worst:.3e}")
    monotone = worst <= 1e-12
    print(f"tv-monotone: {'yes' if monotone else 'no'}")
    return 0 if monotone else 2


def cmd_study(args) -> int:
    if args.kind == "convergence":
        return _study_convergence(args)
    return _study_tv(args)


def _one_goal(goal):
    prop, subject = goal
    cert = prove_property(prop, subject)
    line = f"{cert.subject} {cert.property} {cert.verdict} steps={cert.step_count}"
    if cert.discharged_by:
        line += f" dischargeable-by={','.join(cert.discharged_by)}"
    return line


def cmd_prove_all(args) -> int:
    goals = [(prop, name) for name in sorted(BUILTIN_SYSTEMS)
             for prop in SYSTEM_PROPERTIES]
    goals += [(prop, name) for name in sorted(LIMITERS)
              for prop in LIMITER_PROPERTIES]
    with concurrent.futures.ThreadPoolExecutor(max_workers=args.jobs) as pool:
        lines = list(pool.map(_one_goal, goals))
    report = "\n".join(lines) + "\n"
    counts = {}
    for ln in lines:
        v = ln.split()[2]
        counts[v] = counts.get(v, 0) + 1
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(report)
        print(f"report: {args.report}")
    else:
        sys.stdout.write(report)
    print(f"goals: {len(lines)}  " +
          "  ".join(f"{k}: {counts[k]}" for k in sorted(counts)))
    return 0


# ---------------------------------------------------------------------------
# driver


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="fvcert", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list builtin systems and limiters")

    p = sub.add_parser("prove", help="prove one property, emit a certificate")
    p.add_argument("--system")
    p.add_argument("--limiter")
    p.add_argument("--property", required=True, choices=ALL_PROPERTIES)
    p.add_argument("--assume", action="append", metavar="positive:SYM")
    p.add_argument("--out", metavar="CERT-FILE")

    p = sub.add_parser("check", help="replay a certificate step by step")
    p.add_argument("certificate")

    p = sub.add_parser("codegen", help="emit a standalone C solver")
    p.add_argument("--system", required=True)
    _add_scheme_flags(p)
    _add_grid_flags(p)
    p.add_argument("--out", required=True, metavar="DIR")

    p = sub.add_parser("simulate", help="run the native reference simulator")
    p.add_argument("--system", required=True)
    _add_scheme_flags(p)
    _add_grid_flags(p)
    p.add_argument("--init", default="sine",
                   choices=("sine", "square", "riemann"))
    p.add_argument("--t-end", type=float, required=True, dest="t_end")
    p.add_argument("--dump", metavar="FILE")

    p = sub.add_parser("study", help="convergence and total-variation studies")
    p.add_argument("--kind", required=True, choices=("convergence", "tv"))
    _add_scheme_flags(p)
    p.add_argument("--cells", type=int, default=200)
    p.add_argument("--cfl", type=float, default=0.9)

    p = sub.add_parser("prove-all", help="run every goal, emit the outcome matrix")
    p.add_argument("--report", metavar="FILE")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    return top


_DISPATCH = {
    "list": cmd_list,
    "prove": cmd_prove,
    "check": cmd_check,
    "codegen": cmd_codegen,
    "simulate": cmd_simulate,
    "study": cmd_study,
    "prove-all": cmd_prove_all,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return _DISPATCH[args.command](args)
    except CliError as exc:
        print(f"fvcert: {exc.category}: {exc}", file=sys.stderr)
        return 1
    except CertificateFormatError as exc:
        print(f"fvcert: certificate: {exc}", file=sys.stderr)
        return 1
    except (SystemError, ExprError, NonTermination) as exc:
        print(f"fvcert: toolkit: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"fvcert: io: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
