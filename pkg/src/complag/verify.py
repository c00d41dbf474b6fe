"""Invariant suite behind ``complag verify``.

Must-pass checks are mathematical facts the implementation has to satisfy.
Informational checks compare against hand-expanded displays and report
diagnostics along a trajectory; they never fail the run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import geometry, lagrange
from .calculus import to_real_chart, wirtinger_fd_check
from .dynamics import Compiled, IntegrationAborted, integrate, residual_series
from .errors import AllSamplesRejected, ComplagError
from .expr import ZERO, Coord, Role, add, conjugate, mul, simplify
from .numeric import equal_numeric, relative_deviation, sample_points
from .parser import format_document
from .randexpr import ExprGenerator, default_symbols

MUST, INFO = "must-pass", "informational"


@dataclass
class Check:
    name: str
    kind: str
    passed: bool
    worst: float = 0.0
    tol: float = 0.0
    note: str = ""

    def items(self):
        status = "pass" if self.passed else ("fail" if self.kind == MUST else "differs")
        rows = [("class", self.kind), ("status", status), ("worst", f"{self.worst:.6e}"), ("tolerance", f"{self.tol:g}")]
        if self.note:
            rows.append(("note", self.note))
        return rows


@dataclass
class VerifyReport:
    system: str
    mode: str
    seed: int
    checks: list = field(default_factory=list)

    def add(self, check):
        self.checks.append(check)
        return check

    def failed_must_pass(self):
        return [c.name for c in self.checks if c.kind == MUST and not c.passed]

    def by_name(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def document(self):
        head = [("system", self.system), ("mode", self.mode), ("seed", str(self.seed)),
                ("checks", str(len(self.checks))), ("must_pass_failed", str(len(self.failed_must_pass())))]
        sections = [("verify", head)]
        sections += [(f"check:{c.name}", c.items()) for c in self.checks]
        return format_document(sections)


def _max_numeric(pairs, domain, trials, seed, tol):
    """Worst relative deviation over expression pairs; (worst, note)."""
    worst, note = 0.0, ""
    for k, (a, b) in enumerate(pairs):
        try:
            r = equal_numeric(a, b, trials=trials, tol=tol, domain=domain, seed=seed + k)
        except AllSamplesRejected:
            note = "some comparisons had no admissible sample point"
            continue
        worst = max(worst, r.max_deviation)
    return worst, note


def check_j_squared(report, seed, count=100):
    gen = ExprGenerator(seed, default_symbols(), max_depth=2)
    bad = 0
    for _ in range(count):
        v = geometry.TangentVector([gen() for _ in range(2)])
        if geometry.apply_J(geometry.apply_J(v)) != -v:
            bad += 1
    report.add(Check("J_squared", MUST, bad == 0, float(bad), 0, f"{count} random tangent vectors, structural"))


def check_hermitian(report, K, seed, count=20):
    n = K.n
    gen = ExprGenerator(seed + 1, default_symbols(n), max_depth=2)
    g = [[ZERO] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        for j in range(n):
            g[i][n + j] = K.H_zzb[j][i]
            g[n + j][i] = K.H_zzb[j][i]
    bad = 0
    for _ in range(count):
        X = geometry.TangentVector([gen() for _ in range(2 * n)])
        Y = geometry.TangentVector([gen() for _ in range(2 * n)])
        if geometry.hermitian_residual(g, X, Y) != ZERO:
            bad += 1
    report.add(Check("hermitian_mixed_metric", MUST, bad == 0, float(bad), 0,
                     f"metric from the mixed Hessian block, {count} random vector pairs, structural"))


def check_schwarz(report, K):
    n = K.n
    bad = 0
    for block in (K.H_zz, K.H_zbzb):
        for i in range(n):
            for j in range(n):
                if block[i][j] != block[j][i]:
                    bad += 1
    report.add(Check("hessian_schwarz", MUST, bad == 0, float(bad), 0, "H_zz and H_zbzb symmetric, structural"))


def check_reality(report, L, K, domain, seed):
    if conjugate(L) != L:
        report.add(Check("reality_pairing", MUST, True, 0.0, 1e-10, "skipped: L is not structurally real"))
        return
    n = K.n
    pairs = [(conjugate(K.H_zzb[i][j]), K.H_zbz[i][j]) for i in range(n) for j in range(n)]
    worst, note = _max_numeric(pairs, domain, 20, seed, 1e-10)
    report.add(Check("reality_pairing", MUST, worst <= 1e-10, worst, 1e-10,
                     note or "conj(H_zzb[i][j]) = H_zbz[i][j]"))


def check_closedness(report, L, n, domain, seed):
    pairs = [(a, b) for _, a, b in geometry.third_partial_pairs(L, n)]
    worst, note = _max_numeric(pairs, domain, 10, seed, 1e-9)
    report.add(Check("third_partials_commute", MUST, worst <= 1e-9, worst, 1e-9,
                     note or "third mixed partials of L over (z, zb); d(Phi_L) = 0 at coefficient level"))


def check_fd(report, L, spec, domain, seed, points=10, tol=1e-6):
    n = spec.dof
    variables = []
    for role in (Role.Z, Role.ZBAR, Role.ZDOT, Role.ZBARDOT):
        variables += [Coord(role, i) for i in range(1, n + 1)]
    chart = to_real_chart(L, expand_result=False)
    try:
        pts, _, _ = sample_points([L], domain, points, seed)
    except AllSamplesRejected:
        report.add(Check("fd_derivatives", MUST, False, float("inf"), tol, "no admissible sample point"))
        return
    worst = 0.0
    for p in pts:
        base = {s: v for s, v in p.items() if not (isinstance(s, Coord) and s.role.barred)}
        for v in variables:
            try:
                r = wirtinger_fd_check(L, v, base, step=1e-5, chart=chart)
            except ComplagError:
                worst = float("inf")
                continue
            rel = r.relative
            worst = max(worst, rel if rel == rel else float("inf"))
    report.add(Check("fd_derivatives", MUST, worst <= tol, worst, tol,
                     f"{len(variables)} Wirtinger partials at {len(pts)} points, central difference step 1e-5"))


def check_liouville_energy(report, L, spec):
    V = geometry.liouville(spec)
    via_field = simplify(add(geometry.directional_derivative(V, L), mul(-1, L)))
    ok = via_field == geometry.paper_energy(L, spec)
    report.add(Check("energy_is_V(L)-L", MUST, ok, 0.0 if ok else 1.0, 0, "structural"))


def check_affine(report, spec):
    bad = 0
    for mode in lagrange.MODES:
        el = lagrange.derive(spec, mode)
        bad += sum(not lagrange.residual_is_affine_in_accelerations(r, spec.dof) for r in el.flat())
    report.add(Check("residuals_affine_in_accelerations", MUST, bad == 0, float(bad), 0, "both modes, structural"))


def check_conjugate_closure(report, L, spec, domain, seed):
    if conjugate(L) != L:
        report.add(Check("classical_conjugate_closure", MUST, True, 0.0, 1e-10, "skipped: L is not structurally real"))
        return
    el = lagrange.derive(spec, "classical")
    pairs = [(conjugate(r1), r2) for r1, r2 in el.residuals]
    worst, note = _max_numeric(pairs, _with_accelerations(domain, spec.dof), 20, seed, 1e-10)
    report.add(Check("classical_conjugate_closure", MUST, worst <= 1e-10, worst, 1e-10,
                     note or "conj(R1_i) = R2_i numerically"))


def _with_accelerations(domain, n):
    from dataclasses import replace

    boxes = dict(domain.boxes)
    for i in range(1, n + 1):
        boxes.setdefault(f"zdd{i}", ((-1.0, 1.0), (-1.0, 1.0)))
    return replace(domain, boxes=boxes)


def check_displays(report, L, spec, domain, seed):
    """Mechanical one-forms against the literal reading of the hand expansions."""
    n = spec.dof
    K = geometry.full_kaehler_data(L, spec)
    comparisons = [
        ("dEL_vs_display", K.dEL, geometry.energy_differential_display(L, spec)),
        ("i_xi_PhiL_vs_display", K.i_xi_PhiL, geometry.interior_product_display(L, spec)),
        ("eq_residual_vs_display", geometry.dynamics_residual(L, spec), geometry.residual_display(L, spec)),
    ]
    for name, mech, disp in comparisons:
        worst, note = _max_numeric(list(zip(mech, disp)), domain, 20, seed, 1e-9)
        slots = [f"dz{i}" for i in range(1, n + 1)] + [f"dzb{i}" for i in range(1, n + 1)]
        diff = [s for s, a, b in zip(slots, mech, disp) if simplify(add(a, mul(-1, b))) != ZERO]
        detail = "structurally equal" if not diff else "slots differing: " + " ".join(diff)
        report.add(Check(name, INFO, worst <= 1e-9, worst, 1e-9, note or detail))


def check_trajectory(report, L, spec, mode, state, t_end, dt):
    try:
        traj = integrate(spec, "classical", state, t_end, dt)
        aborted = ""
    except IntegrationAborted as exc:
        traj = exc.trajectory
        aborted = f"; integration stopped early: {exc.cause}"
    except ComplagError as exc:
        report.add(Check("backsubstitution", MUST, False, float("inf"), 1e-10, f"no trajectory: {exc}"))
        return
    report.add(Check("backsubstitution", MUST, traj.backsub <= 1e-10, traj.backsub, 1e-10,
                     f"accelerations substituted into the classical residuals, {len(traj)} samples{aborted}"))
    ep0 = traj.paper_energy[0]
    paper_var = max(relative_deviation(ep0, e) for e in traj.paper_energy)
    report.add(Check("energy_diagnostics", INFO, paper_var <= 1e-8, paper_var, 1e-8,
                     f"classical energy drift {traj.drift:.3e}; paper energy varies by {paper_var:.3e} "
                     f"(relative) over t in [{traj.times[0]:g}, {traj.times[-1]:g}], so it is not conserved "
                     f"by the classical motion"))
    eq_res = geometry.dynamics_residual(L, spec)
    fn = Compiled(eq_res, spec)
    worst = max(abs(v) for s in traj.states() for v in fn(s))
    report.add(Check("eq_residual_along_trajectory", INFO, worst <= 1e-9, worst, 1e-9,
                     "i_xi Phi_L - dE_L with xi = velocities, evaluated on the classical trajectory"))
    paper = lagrange.derive(spec, "paper").flat()
    step = max(1, len(traj) // 50)
    sub = type(traj)(traj.times[::step], traj.z[::step], traj.zdot[::step], traj.energy[::step],
                     traj.paper_energy[::step], traj.dt, traj.mode, traj.paired)
    values = residual_series(paper, spec, sub)
    worst = max(abs(v) for row in values for v in row)
    report.add(Check("paper_mode_residuals_along_trajectory", INFO, worst <= 1e-9, worst, 1e-9,
                     "paper-mode residuals with classical accelerations substituted"))


def run_checks(spec, mode="paper", seed=0, state=None, t_end=0.5, dt=1e-3):
    L = simplify(spec.lagrangian)
    n = spec.dof
    domain = lagrange.default_domain(spec)
    K = geometry.kaehler_coefficients(L, n)
    report = VerifyReport(spec.name, mode, seed)
    check_j_squared(report, seed)
    check_hermitian(report, K, seed)
    check_schwarz(report, K)
    check_reality(report, L, K, domain, seed)
    check_closedness(report, L, n, domain, seed)
    check_fd(report, L, spec, domain, seed)
    check_liouville_energy(report, L, spec)
    check_affine(report, spec)
    check_conjugate_closure(report, L, spec, domain, seed)
    check_displays(report, L, spec, domain, seed)
    if state is not None:
        check_trajectory(report, L, spec, mode, state, t_end, dt)
    return report


__all__ = ["run_checks", "VerifyReport", "Check", "MUST", "INFO"]
