"""Acceptance criteria, one test each.

Every test records a single verdict line; conftest prints them all at the end
of the run, so they appear without ``-s``.  A criterion that is not met fails
here with its measured numbers.
"""

import math
import time

from complag import cli, geometry, lagrange, partial
from complag.calculus import to_real_chart, wirtinger_fd_check
from complag.dynamics import State, integrate
from complag.errors import IntegrationAborted
from complag.expr import Coord, Role, conjugate, simplify
from complag.numeric import SamplingDomain, equal_numeric, sample_points
from complag.parser import parse_expr, read_document
from complag.printer import print_expr
from complag.randexpr import ExprGenerator, default_symbols
from complag.systems import load_builtin

RESULTS = {}


def record(number, passed, detail):
    RESULTS[number] = (passed, detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
    return passed


def test_criterion_1_fd_soundness():
    start = time.perf_counter()
    cases = []
    for name in ("hinged-rod", "central-force"):
        spec = load_builtin(name)
        cases.append((simplify(spec.lagrangian), lagrange.default_domain(spec)))
    gen = ExprGenerator(0, default_symbols(1), smooth=True, max_depth=3)
    unit = SamplingDomain(default_box=((-1.0, 1.0), (-1.0, 1.0)))
    cases += [(simplify(gen()), unit) for _ in range(20)]
    variables = [Coord(r, 1) for r in (Role.Z, Role.ZBAR, Role.ZDOT, Role.ZBARDOT)]
    worst, checked = 0.0, 0
    for k, (L, domain) in enumerate(cases):
        chart = to_real_chart(L, expand_result=False)
        points, _, _ = sample_points([L], domain, 10, k)
        for p in points:
            base = {s: v for s, v in p.items() if not (isinstance(s, Coord) and s.role.barred)}
            for v in variables:
                worst = max(worst, wirtinger_fd_check(L, v, base, step=1e-5, chart=chart).relative)
                checked += 1
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 5
    assert record(1, ok, f"{checked} partials, worst relative FD error {worst:.2e} (tol 1e-6), {elapsed:.2f} s (< 5 s)")


def test_criterion_2_app2_momentum():
    spec = load_builtin("central-force")
    dL = partial(spec.lagrangian, "zd1")
    expected = simplify(parse_expr("1/2*m*zbd1"))
    structural = dL == expected
    rep = equal_numeric(dL, expected, 100, 1e-12, domain=lagrange.default_domain(spec))
    ok = structural and rep.equal
    assert record(2, ok, f"dL/dzd1 = {print_expr(dL)}; structural {structural}, "
                         f"numeric max deviation {rep.max_deviation:.1e} (tol 1e-12)")


def test_criterion_3_reconciliation():
    s, u = lagrange.reconcile_application("central-force", seed=0, tol=1e-9)
    first = lagrange.reconcile_application("hinged-rod", seed=0)
    again = lagrange.reconcile_application("hinged-rod", seed=0)
    deterministic = [r.items() for r in first] == [r.items() for r in again]
    recorded = all(r.match or (r.argmax and r.max_deviation > r.tol) for r in first)
    ok = s.match and s.samples == 100 and deterministic and recorded
    app1 = ", ".join(f"{r.name}: {r.verdict} {r.max_deviation:.3g}" for r in first)
    assert record(3, ok, f"S vs dL/dz1 max relative {s.max_deviation:.1e} over {s.samples} points (tol 1e-9); "
                         f"App-1 [{app1}], deterministic {deterministic}")


def test_criterion_4_geometry():
    gen = ExprGenerator(4, default_symbols(), max_depth=2)
    j_bad = 0
    for _ in range(100):
        v = geometry.TangentVector([gen(), gen()])
        j_bad += geometry.apply_J(geometry.apply_J(v)) != -v
    schwarz = True
    worst = 0.0
    for name in ("hinged-rod", "central-force"):
        spec = load_builtin(name)
        L = simplify(spec.lagrangian)
        K = geometry.kaehler_coefficients(L, spec.dof)
        for block in (K.H_zz, K.H_zbzb):
            n = spec.dof
            schwarz &= all(block[i][j] == block[j][i] for i in range(n) for j in range(n))
        for k, (_, a, b) in enumerate(geometry.third_partial_pairs(L, spec.dof)):
            worst = max(worst, equal_numeric(a, b, 20, 1e-9, domain=lagrange.default_domain(spec), seed=k).max_deviation)
        # mixed second partials commute structurally as well
        schwarz &= partial(partial(L, "z1"), "zb1") == partial(partial(L, "zb1"), "z1")
    ok = j_bad == 0 and schwarz and worst <= 1e-9
    assert record(4, ok, f"J^2 = -1 on 100 vectors ({j_bad} failures); Schwarz structural {schwarz}; "
                         f"third partials max relative {worst:.1e} (tol 1e-9)")


def test_criterion_5_golden(capsys):
    code = cli.main(["derive", "--system", "central-force", "--mode", "paper"])
    out = capsys.readouterr().out
    got = read_document(out)["equations"]["R2_1"]
    golden = "I*(1/2*m*zbdd1) + 1/2*m*zbd1"
    ok = code == 0 and got == golden
    assert record(5, ok, f"R2_1 printed as {got!r} (golden {golden!r})")


def _oscillator_error(spec, dt):
    traj = integrate(spec, "classical", State(0, [1], [0]), 10.0, dt)
    return max(abs(z[0] - math.cos(t)) for t, z in zip(traj.times, traj.z))


def test_criterion_6_dynamics():
    spec = load_builtin("harmonic-oscillator")
    start = time.perf_counter()
    errors = [_oscillator_error(spec, dt) for dt in (4e-3, 2e-3, 1e-3)]
    elapsed = time.perf_counter() - start
    orders = [math.log2(a / b) for a, b in zip(errors, errors[1:])]
    ok = errors[-1] < 1e-6 and all(abs(p - 4) <= 0.3 for p in orders) and elapsed < 2
    assert record(6, ok, f"max error {errors[-1]:.1e} at dt=1e-3 (tol 1e-6); orders "
                         f"{orders[0]:.3f}, {orders[1]:.3f} (4 +/- 0.3); {elapsed:.2f} s (< 2 s)")


def test_criterion_7_energy():
    spec = load_builtin("central-force")
    try:
        traj = integrate(spec, "classical", State(0, [1.2], [0.3j]), 5.0, 1e-3)
        reached, why = 5.0, ""
    except IntegrationAborted as exc:
        traj, reached = exc.trajectory, exc.t
        why = f"; trajectory hits singular locus {getattr(exc.cause, 'locus', '?')} at t={reached:.3f}"
    e0 = traj.paper_energy[0]
    spread = max(abs(e - e0) for e in traj.paper_energy) / abs(e0)
    ok = reached == 5.0 and traj.drift < 1e-8
    assert record(7, ok, f"classical drift {traj.drift:.1e} over [0, {traj.times[-1]:.3f}] (tol 1e-8){why}; "
                         f"paper energy varies {spread:.2f} relative")


def test_criterion_8_infrastructure(capsys):
    raws = ExprGenerator(8).many(1000)
    trees = [simplify(r) for r in raws]
    round_trip = sum(simplify(parse_expr(print_expr(e))) != e for e in trees)
    involution = sum(conjugate(conjugate(e)) != e for e in trees)
    idempotent = sum(simplify(e) != e for e in trees)
    outputs = []
    for argv in (["reconcile", "--system", "hinged-rod", "--seed", "3"],
                 ["verify", "--system", "harmonic-oscillator", "--seed", "3", "--t-end", "0.1"]):
        runs = []
        for _ in range(2):
            cli.main(argv)
            runs.append(capsys.readouterr().out)
        outputs.append(runs[0] == runs[1])
    ok = not (round_trip or involution or idempotent) and all(outputs)
    assert record(8, ok, f"failures on 1000 trees: round trip {round_trip}, involution {involution}, "
                         f"idempotence {idempotent}; CLI byte-identical {all(outputs)}")
