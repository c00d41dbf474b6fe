"""Complex Euler-Lagrange residuals and reconciliation against printed results.

Two residual families are derived per coordinate index i:

* ``paper`` mode:     R1_i = I*d/dt(dL/dz_i) - dL/dz_i,
                      R2_i = I*d/dt(dL/dzd_i) + dL/dzd_i
* ``classical`` mode: R1_i = d/dt(dL/dzd_i) - dL/dz_i,
                      R2_i = d/dt(dL/dzbd_i) - dL/dzb_i

Classical mode gives the second-order equations used for simulation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .calculus import partial, time_derivative
from .errors import AllSamplesRejected, OrderOverflow
from .expr import ZERO, I, Coord, Role, add, conjugate, free_symbols, mul, simplify, substitute
from .numeric import SamplingDomain, format_point, relative_deviation, sample_points
from .parser import parse_expr
from .systems import load_builtin

MODES = ("paper", "classical")


def z(i):
    return Coord(Role.Z, i)


def zb(i):
    return Coord(Role.ZBAR, i)


def zd(i):
    return Coord(Role.ZDOT, i)


def zbd(i):
    return Coord(Role.ZBARDOT, i)


def zdd(i):
    return Coord(Role.ZDDOT, i)


def zbdd(i):
    return Coord(Role.ZBARDDOT, i)


@dataclass
class ELSystem:
    mode: str
    residuals: list  # [(R1_i, R2_i)] for i = 1..n
    spec: object

    @property
    def n(self):
        return len(self.residuals)

    def flat(self):
        """All 2n residuals, first family then second."""
        return [r for r, _ in self.residuals] + [r for _, r in self.residuals]

    def named(self):
        out = []
        for i, (r1, r2) in enumerate(self.residuals, 1):
            out.append((f"R1_{i}", r1))
            out.append((f"R2_{i}", r2))
        return out


def _check_order(L):
    for s in free_symbols(L):
        if isinstance(s, Coord) and s.role.order >= 2:
            raise OrderOverflow(f"the Lagrangian contains the acceleration {s.name}")


def derive_paper_mode(spec):
    L = simplify(spec.lagrangian)
    _check_order(L)
    residuals = []
    for i in range(1, spec.dof + 1):
        dz = partial(L, z(i))
        dzd = partial(L, zd(i))
        r1 = add(mul(I, time_derivative(dz)), mul(-1, dz))
        r2 = add(mul(I, time_derivative(dzd)), dzd)
        residuals.append((r1, r2))
    return ELSystem("paper", residuals, spec)


def derive_classical_mode(spec):
    L = simplify(spec.lagrangian)
    _check_order(L)
    residuals = []
    for i in range(1, spec.dof + 1):
        r1 = add(time_derivative(partial(L, zd(i))), mul(-1, partial(L, z(i))))
        r2 = add(time_derivative(partial(L, zbd(i))), mul(-1, partial(L, zb(i))))
        residuals.append((r1, r2))
    return ELSystem("classical", residuals, spec)


def derive(spec, mode="paper"):
    if mode == "paper":
        return derive_paper_mode(spec)
    if mode == "classical":
        return derive_classical_mode(spec)
    raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def acceleration_symbols(n):
    return [zdd(i) for i in range(1, n + 1)] + [zbdd(i) for i in range(1, n + 1)]


# ---------------------------------------------------------------------------
# transcribed displays of the two worked applications

_A1 = "(4*l^2 - (z1 + zb1)^2)"
_B1 = "((z1 + zb1)*(zd1 + zbd1))"

APP1_Q = (
    "l^2*(zd1 + zbd1)*B/A^2 + (zd1 + zbd1)*B/(4*A) + (z1 + zb1)*B^2/(4*A^2)"
    " + l*B*sin(theta)*(I*(zd1 - zbd1) - B/A^(1/2))/(2*A^(3/2))"
    " - l*B*sin(theta)*(zd1 + zbd1)*(zd1 + zbd1 + (z1 + zb1)*B/A)/(2*A)"
    " - 1/2*I*g"
)
APP1_W = (
    "l^2*(zd1 + zbd1)/A + (zd1 + zbd1)*B/(4*A) - 1/4*zd1 + 1/4*zbd1"
    " + l*sin(theta)*(I*(zd1 - zbd1) - B/A^(1/2))/(2*A^(1/2))"
    " - l*B*sin(theta)*(zd1 + zbd1)*(I - (z1 + zb1)/A^(1/2))/(2*A^(1/2))"
)

_W2 = "sqrt(1 - (z1 - zb1)^2/(z1 + zb1)^2)"
APP2_S = (
    "-A/(2*z1)*sqrt(z1*zb1)^alpha"
    " + I*m*g*(z1 - zb1)*zb1/(2*sqrt(z1*zb1)*(z1 + zb1)*W)"
    " + I*m*g*sqrt(z1*zb1)/((z1 + zb1)*W)"
    " - I*m*g*sqrt(z1*zb1)*(z1 - zb1)/((z1 + zb1)^2*W)"
    " - I*m*g*sqrt(z1*zb1)*(z1 - zb1)*(-(z1 - zb1)/(z1 + zb1)^2 + (z1 - zb1)^2/(z1 + zb1)^3)/((z1 + zb1)*W^3)"
)
APP2_U = "1/2*m*zbd1"
APP2_L_TEMPLATE = (
    "1/2*m*zd1*zbd1 - A/alpha*sqrt(z1*zb1)^alpha"
    " - J*m*g*(z1 - zb1)*sqrt(z1*zb1)/((z1 + zb1)*W)"
)


def _expand_shorthand(text, **names):
    for key, value in names.items():
        text = text.replace(key, value)
    return text


def application1_oracle():
    """(spec, Q, W) for the hinged rod; Q and W exactly as printed."""
    spec = load_builtin("hinged-rod")
    q = simplify(parse_expr(_expand_shorthand(APP1_Q, A=_A1, B=_B1)))
    w = simplify(parse_expr(_expand_shorthand(APP1_W, A=_A1, B=_B1)))
    return spec, q, w


def application2_lagrangian(j_sign=-1):
    """The central-force Lagrangian with the printed ``j`` read as ``j_sign*I``."""
    j = "I" if j_sign > 0 else "(-I)"
    return simplify(parse_expr(APP2_L_TEMPLATE.replace("W", _W2).replace("J", j)))


def application2_oracle(j_sign=-1):
    """(spec, S, U) for the central-force system; S and U exactly as printed."""
    spec = load_builtin("central-force")
    if j_sign > 0:
        spec.lagrangian = application2_lagrangian(j_sign)
    s = simplify(parse_expr(APP2_S.replace("W", _W2)))
    u = simplify(parse_expr(APP2_U))
    return spec, s, u


def default_domain(spec):
    """Sampling box clear of the applications' singular loci."""
    params = {k: float(v) for k, v in spec.params.items()}
    boxes = {}
    for i in range(1, spec.dof + 1):
        boxes[f"zd{i}"] = ((-1.0, 1.0), (-1.0, 1.0))
        if spec.name == "hinged-rod":
            ell = params.get("l", 1.0)
            boxes[f"z{i}"] = ((0.1 * ell, 0.8 * ell), (-1.0, 1.0))
        elif spec.name == "central-force":
            boxes[f"z{i}"] = ((0.5, 2.0), (-0.4, 0.4))
        else:
            boxes[f"z{i}"] = ((-2.0, 2.0), (-2.0, 2.0))
    return SamplingDomain(boxes=boxes, params=params, loci=list(spec.loci))


# ---------------------------------------------------------------------------
# reconciliation


@dataclass
class ReconciliationReport:
    name: str
    max_deviation: float
    argmax: dict
    samples: int
    tol: float
    verdict: str
    rejected: int = 0
    notes: list = field(default_factory=list)
    terms: list = field(default_factory=list)  # TermFit rows when divergent

    @property
    def match(self):
        return self.verdict == "match"

    def items(self):
        rows = [
            ("verdict", self.verdict),
            ("max_relative_deviation", repr(self.max_deviation)),
            ("tolerance", repr(self.tol)),
            ("samples", str(self.samples)),
            ("rejected", str(self.rejected)),
            ("argmax", format_point(self.argmax) if self.argmax else "none"),
        ]
        for k, note in enumerate(self.notes, 1):
            rows.append((f"note{k}", note))
        for row in self.terms:
            rows.append((f"term{row.index}", row.describe()))
        return rows


@dataclass
class TermFit:
    index: int
    text: str
    weight: complex
    value_at_argmax: complex

    def describe(self):
        w = self.weight
        return (f"weight=({w.real:.6g}{w.imag:+.6g}j) value_at_argmax=({self.value_at_argmax.real:.6g}"
                f"{self.value_at_argmax.imag:+.6g}j) :: {self.text}")


def term_breakdown(derived, transcribed, points):
    """Least-squares weights w_k with derived ~ sum_k w_k * term_k over the points.

    Weights near 1 mark terms that agree, near -1 sign flips, near 0 spurious
    terms.  The fit residual says whether any reweighting of the printed terms
    can reproduce the derived expression.
    """
    from .numeric import evaluate
    from .printer import print_expr

    terms = list(transcribed.terms) if transcribed.__class__.__name__ == "Add" else [transcribed]
    rows, rhs = [], []
    for p in points:
        try:
            rows.append([evaluate(t, p) for t in terms])
            rhs.append(evaluate(derived, p))
        except Exception:
            continue
    a = np.array(rows, dtype=complex)
    b = np.array(rhs, dtype=complex)
    w, *_ = np.linalg.lstsq(a, b, rcond=None)
    resid = float(np.max(np.abs(a @ w - b) / (1 + np.abs(b)))) if len(b) else float("nan")
    first = a[0] if len(a) else np.zeros(len(terms))
    fits = [TermFit(k + 1, print_expr(t), complex(w[k]), complex(first[k])) for k, t in enumerate(terms)]
    return fits, resid


def reconcile(derived, transcribed, domain=None, tol=1e-9, trials=100, seed=0, name="comparison"):
    """Randomized comparison of a derived expression with a transcribed one."""
    domain = domain or SamplingDomain()
    try:
        points, values, rejected = sample_points([derived, transcribed], domain, trials, seed)
    except AllSamplesRejected:
        raise AllSamplesRejected(f"{name}: the sampling domain meets a singular locus everywhere") from None
    worst, worst_point = -1.0, None
    for p, (a, b) in zip(points, values):
        dev = relative_deviation(a, b)
        if dev > worst:
            worst, worst_point = dev, p
    verdict = "match" if worst <= tol else "divergence"
    report = ReconciliationReport(name, worst, worst_point, len(points), tol, verdict, rejected)
    if verdict == "divergence":
        ordered = [worst_point] + [p for p in points if p is not worst_point]
        fits, resid = term_breakdown(derived, transcribed, ordered)
        report.terms = fits
        report.notes.append(f"least-squares term refit residual {resid:.3e} (weights per printed term below)")
    return report


def reconcile_application(name, seed=0, tol=1e-9, trials=100, j_sign=-1):
    """All printed-vs-derived comparisons for one application, in a fixed order."""
    reports = []
    if name == "hinged-rod":
        spec, q, w = application1_oracle()
        L = spec.lagrangian
        m = spec.params["m"]
        dom = default_domain(spec)
        reports.append(reconcile(partial(L, z(1)), mul(m, q), dom, tol, trials, seed, "m*Q vs dL/dz1"))
        reports.append(reconcile(partial(L, zd(1)), mul(m, w), dom, tol, trials, seed, "m*W vs dL/dzd1"))
        for r in reports:
            r.notes.insert(0, "theta is a fixed parameter (theta = %s)" % spec.params["theta"])
    elif name == "central-force":
        spec, s, u = application2_oracle(j_sign)
        L = spec.lagrangian
        dom = default_domain(spec)
        reports.append(reconcile(partial(L, z(1)), s, dom, tol, trials, seed, "S vs dL/dz1"))
        reports.append(reconcile(partial(L, zd(1)), u, dom, tol, trials, seed, "U vs dL/dzd1"))
        reading = "-I" if j_sign < 0 else "I"
        reports[0].notes.insert(0, f"printed coefficient j read as {reading}")
        other = reconcile(partial(application2_lagrangian(-j_sign), z(1)), s, dom, tol, trials, seed)
        alt = "I" if j_sign < 0 else "-I"
        reports[0].notes.append(
            f"with j read as {alt} instead: verdict {other.verdict}, max deviation {other.max_deviation!r}")
    else:
        raise KeyError(f"no printed results to reconcile for system {name!r}")
    return reports


def residual_is_affine_in_accelerations(residual, n):
    accs = acceleration_symbols(n)
    for a in accs:
        da = partial(residual, a)
        for b in accs:
            if partial(da, b) != ZERO:
                return False
    return True


def conjugate_closure_holds(el):
    """Structural check that R2_i = conj(R1_i) for every i."""
    return all(conjugate(r1) == r2 for r1, r2 in el.residuals)


def substitute_params(e, spec):
    return substitute(e, {k: v for k, v in spec.params.items()})
