"""complag command line: derive, simulate, verify, reconcile, examples.

Exit codes: 0 success, 2 usage or parse error, 3 derivation error or failed
must-pass check, 4 unsupported mode, 5 integration aborted.
"""

import argparse
import sys
from pathlib import Path

from . import geometry, lagrange
from .dynamics import IntegrationAborted, State, integrate
from .errors import ComplagError, ParseError, UnknownIdentifier
from .parser import format_document
from .printer import print_expr
from .systems import BUILTIN, builtin_text, resolve_system
from .verify import run_checks

EXIT_OK, EXIT_USAGE, EXIT_DERIVE, EXIT_MODE, EXIT_ABORT = 0, 2, 3, 4, 5

DEFAULT_SEED = 0
DEFAULT_TOL = 1e-9

# initial data used when --z0/--zd0 are not given
DEFAULT_INITIAL = {
    "central-force": ([1.2], [0.3j]),
    "hinged-rod": ([0.5 + 0.2j], [0.1 + 0.1j]),
    "harmonic-oscillator": ([1.0], [0.0]),
    "free-particle": ([0.0], [1.0 + 0.5j]),
}


class UsageError(Exception):
    pass


def positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def complex_pair(text):
    try:
        re, im = text.split(",")
        return complex(float(re), float(im))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 're,im', got {text!r}") from None


def build_parser():
    p = argparse.ArgumentParser(prog="complag", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, mode_default):
        sp.add_argument("--system", required=True, help="built-in name or path to a .sys file")
        sp.add_argument("--mode", choices=lagrange.MODES, default=mode_default)
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
        sp.add_argument("--tol", type=positive_float, default=DEFAULT_TOL)
        sp.add_argument("--out", help="write the document here instead of standard output")

    common(sub.add_parser("derive", help="dump the derived equations"), "paper")
    sim = sub.add_parser("simulate", help="integrate a trajectory to CSV")
    common(sim, "classical")
    sim.add_argument("--t-end", type=positive_float, default=10.0)
    sim.add_argument("--dt", type=positive_float, default=1e-3)
    sim.add_argument("--z0", type=complex_pair, action="append")
    sim.add_argument("--zd0", type=complex_pair, action="append")
    ver = sub.add_parser("verify", help="run the invariant suite for a system")
    common(ver, "paper")
    ver.add_argument("--t-end", type=positive_float, default=0.5)
    ver.add_argument("--dt", type=positive_float, default=1e-3)
    ver.add_argument("--z0", type=complex_pair, action="append")
    ver.add_argument("--zd0", type=complex_pair, action="append")
    common(sub.add_parser("reconcile", help="compare derived and printed expressions"), "paper")
    ex = sub.add_parser("examples", help="list or write the built-in system files")
    ex.add_argument("--emit", metavar="DIR", help="directory to write the .sys files into")
    return p


def emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def initial_state(spec, z0, zd0):
    n = spec.dof
    dz, dzd = DEFAULT_INITIAL.get(spec.name, ([1.0] * n, [0.0] * n))
    z0 = list(z0) if z0 else list(dz)
    zd0 = list(zd0) if zd0 else list(dzd)
    if len(z0) != n or len(zd0) != n:
        raise UsageError(f"system has {n} degrees of freedom; got {len(z0)} --z0 and {len(zd0)} --zd0 values")
    return State(0.0, z0, zd0)


# ---------------------------------------------------------------------------
# derive


def derive_document(spec, mode):
    el = lagrange.derive(spec, mode)
    K = geometry.full_kaehler_data(spec.lagrangian, spec)
    n = spec.dof
    eqs = [("L", print_expr(spec.lagrangian))]
    eqs += [(k, print_expr(v)) for k, v in el.named()]
    eqs.append(("E_paper", print_expr(K.energy)))
    eqs.append(("E_classical", print_expr(geometry.classical_energy(spec.lagrangian, spec))))
    hess = []
    for name, block in K.blocks():
        for i in range(n):
            for j in range(n):
                hess.append((f"{name}[{i + 1},{j + 1}]", print_expr(block[i][j])))
    forms = []
    names = [f"z{i}" for i in range(1, n + 1)] + [f"zb{i}" for i in range(1, n + 1)]
    for label, coeffs in (("dEL", K.dEL), ("i_xi_PhiL", K.i_xi_PhiL)):
        forms += [(f"{label}.d{v}", print_expr(c)) for v, c in zip(names, coeffs)]
    header = [("name", spec.name), ("dof", str(n)), ("mode", mode)]
    return format_document([("system", header), ("equations", eqs), ("hessian", hess), ("one-forms", forms)])


def cmd_derive(args, spec):
    emit(derive_document(spec, args.mode), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args, spec):
    if args.mode != "classical":
        print("complag: paper-mode residuals do not form an initial-value problem; "
              "simulate with --mode classical (paper-mode residuals are reported by verify)", file=sys.stderr)
        return EXIT_MODE
    s0 = initial_state(spec, args.z0, args.zd0)
    if not args.t_end > s0.t:
        raise UsageError("--t-end must be positive")
    try:
        traj = integrate(spec, "classical", s0, args.t_end, args.dt)
    except IntegrationAborted as exc:
        part = exc.trajectory
        emit(part.to_csv(trailer=f"# aborted at t={exc.t!r}"), args.out)
        locus = getattr(exc.cause, "locus", None)
        where = f" (locus {locus})" if locus else ""
        print(f"complag: {exc.cause}{where}", file=sys.stderr)
        print(f"samples={len(part)} drift={part.drift:.3e} t_abort={exc.t!r}", file=sys.stderr)
        return EXIT_ABORT
    emit(traj.to_csv(), args.out)
    print(f"samples={len(traj)} drift={traj.drift:.3e} backsub={traj.backsub:.3e}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args, spec):
    s0 = initial_state(spec, args.z0, args.zd0)
    report = run_checks(spec, args.mode, seed=args.seed, state=s0, t_end=args.t_end, dt=args.dt)
    emit(report.document(), args.out)
    failed = report.failed_must_pass()
    for name in failed:
        print(f"complag: must-pass check failed: {name}", file=sys.stderr)
    return EXIT_OK if not failed else EXIT_DERIVE


# ---------------------------------------------------------------------------
# reconcile


def cmd_reconcile(args, spec):
    if spec.name not in ("hinged-rod", "central-force"):
        raise UsageError(f"no printed results to reconcile for system {spec.name!r} "
                         "(known: hinged-rod, central-force)")
    reports = lagrange.reconcile_application(spec.name, seed=args.seed, tol=args.tol)
    sections = [("reconcile", [("system", spec.name), ("seed", str(args.seed)), ("tolerance", repr(args.tol))])]
    for r in reports:
        sections.append((f"comparison:{r.name.replace(' ', '_')}", r.items()))
    emit(format_document(sections), args.out)
    return EXIT_OK


def cmd_examples(args):
    if not args.emit:
        sys.stdout.write("".join(f"{name}\n" for name in BUILTIN))
        return EXIT_OK
    out = Path(args.emit)
    out.mkdir(parents=True, exist_ok=True)
    for name in BUILTIN:
        (out / f"{name}.sys").write_text(builtin_text(name))
    return EXIT_OK


COMMANDS = {
    "derive": cmd_derive,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "reconcile": cmd_reconcile,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "examples":
        return cmd_examples(args)
    try:
        spec = resolve_system(args.system)
    except (ParseError, UnknownIdentifier, ComplagError) as exc:
        print(f"complag: {args.system}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, OSError) as exc:
        print(f"complag: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, spec)
    except UsageError as exc:
        print(f"complag: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ComplagError as exc:
        print(f"complag: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DERIVE


if __name__ == "__main__":
    sys.exit(main())
