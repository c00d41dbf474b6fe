"""Numeric equations of motion: compiled residuals, accelerations, RK4 integration.

Accelerations come from the classical-mode residuals, which are affine in
(zdd, zbdd): R = M a + b.  M and b are derived symbolically once, lowered
to a register program and evaluated by the selected kernel backend.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from . import kernels
from .calculus import partial
from .errors import (
    DomainError,
    IntegrationAborted,
    SingularLocus,
    SingularMassMatrix,
    UnboundSymbol,
)
from .expr import ZERO, Coord, Param, Role, Time, free_symbols, simplify, substitute
from .geometry import classical_energy, paper_energy
from .kernels import _kernels_py
from .lagrange import acceleration_symbols, derive

LOCUS_GUARD = 1e-9
COND_MAX = 1e12


@dataclass
class State:
    t: float
    z: list
    zdot: list
    zbar: list = None  # independent barred channel; None means conj(z)
    zbardot: list = None

    def __post_init__(self):
        self.z = [complex(v) for v in self.z]
        self.zdot = [complex(v) for v in self.zdot]
        if len(self.z) != len(self.zdot):
            raise ValueError("z and zdot differ in length")
        if self.zbar is not None:
            self.zbar = [complex(v) for v in self.zbar]
            self.zbardot = [complex(v) for v in self.zbardot]
        for v in self.z + self.zdot + (self.zbar or []) + (self.zbardot or []):
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValueError("state components must be finite")

    @property
    def n(self):
        return len(self.z)

    @property
    def paired(self):
        return self.zbar is None

    def barred(self):
        if self.paired:
            return [v.conjugate() for v in self.z], [v.conjugate() for v in self.zdot]
        return self.zbar, self.zbardot

    def inputs(self, acc=None, accbar=None):
        """Kernel input vector (t, z, zb, zd, zbd, zdd, zbdd)."""
        zb, zbd = self.barred()
        n = self.n
        acc = acc or [0j] * n
        accbar = accbar or [0j] * n
        return [complex(self.t)] + self.z + zb + self.zdot + zbd + list(acc) + list(accbar)

    def point(self):
        """Symbol -> value map for symbolic evaluation."""
        zb, zbd = self.barred()
        out = {Time(): complex(self.t)}
        for i in range(self.n):
            out[Coord(Role.Z, i + 1)] = self.z[i]
            out[Coord(Role.ZBAR, i + 1)] = zb[i]
            out[Coord(Role.ZDOT, i + 1)] = self.zdot[i]
            out[Coord(Role.ZBARDOT, i + 1)] = zbd[i]
        return out


class Compiled:
    """Expressions evaluated on States through a kernel backend."""

    def __init__(self, exprs, spec, backend=None):
        self.exprs = [simplify(e) for e in exprs]
        self.spec = spec
        check_symbols(self.exprs, spec)
        self.program = kernels.compile_program(self.exprs, spec.dof, spec.param_floats())
        self.backend = backend or kernels.backend
        self.kernel = self.backend.Kernel(self.program)

    def __call__(self, state, acc=None, accbar=None):
        if isinstance(state, State):
            return self.kernel(state.inputs(acc, accbar))
        return self.kernel(state)

    def __len__(self):
        return len(self.exprs)


def check_symbols(exprs, spec):
    n = spec.dof
    for e in exprs:
        for s in free_symbols(e):
            if isinstance(s, Time):
                continue
            if isinstance(s, Param) and s.name in spec.params:
                continue
            if isinstance(s, Coord) and not s.role.is_real and 1 <= s.index <= n:
                continue
            raise UnboundSymbol(s)


def compile(exprs, spec, backend=None):  # noqa: A001 - public name from the interface
    if not isinstance(exprs, (list, tuple)):
        exprs = [exprs]
    return Compiled(exprs, spec, backend)


class MassMatrix:
    """Velocity Hessian of L over (zd, zbd), as a 2n x 2n expression matrix."""

    def __init__(self, L, n):
        vel = [Coord(Role.ZDOT, i) for i in range(1, n + 1)] + [Coord(Role.ZBARDOT, i) for i in range(1, n + 1)]
        self.n = n
        self.entries = [[partial(partial(L, a), b) for b in vel] for a in vel]

    def block(self, name):
        n = self.n
        rows = {"zd_zd": (0, 0), "zd_zbd": (0, n), "zbd_zd": (n, 0), "zbd_zbd": (n, n)}[name]
        r0, c0 = rows
        return [row[c0:c0 + n] for row in self.entries[r0:r0 + n]]


class SystemModel:
    """Everything numeric about one system, built once per (spec, backend)."""

    def __init__(self, spec, mode="classical", backend=None):
        if mode != "classical":
            raise ValueError("only classical-mode equations define an initial-value problem; "
                             "paper-mode residuals are evaluated along classical trajectories instead")
        self.spec = spec
        self.mode = mode
        self.backend = backend or kernels.backend
        n = spec.dof
        self.L = simplify(spec.lagrangian)
        self.el = derive(spec, "classical")
        residuals = self.el.flat()
        accs = acceleration_symbols(n)
        zero_acc = {a: ZERO for a in accs}
        self.residuals = residuals
        self.b = [substitute(r, zero_acc) for r in residuals]
        self.M = [partial(r, a) for r in residuals for a in accs]
        self.loci = list(spec.loci)
        self.locus_names = [name for name, _ in spec.singular]
        self.accel_fn = Compiled(self.b + self.M + self.loci, spec, self.backend)
        self.energy_fn = Compiled([classical_energy(self.L, spec), paper_energy(self.L, spec)], spec, self.backend)
        self.residual_fn = Compiled(residuals, spec, self.backend)

    @property
    def n(self):
        return self.spec.dof

    def locus_name(self, index):
        if 0 <= index < len(self.locus_names):
            return self.locus_names[index]
        return f"locus{index + 1}"


_MODELS = {}


def model_for(spec, mode="classical", backend=None):
    backend = backend or kernels.backend
    key = (spec.name, str(spec.lagrangian), tuple(sorted(spec.params.items())), spec.dof,
           tuple(spec.singular), mode, backend.NAME)
    hit = _MODELS.get(key)
    if hit is None:
        hit = _MODELS[key] = SystemModel(spec, mode, backend)
    return hit


def _raise_status(model, status, locus, t, stage=None):
    if status == kernels.LOCUS:
        name = model.locus_name(locus)
        return SingularLocus(f"state reached singular locus {name} at t={t!r}", name)
    if status == kernels.SINGULAR:
        return SingularMassMatrix(f"mass matrix singular or ill-conditioned (condition > {COND_MAX:g}) at t={t!r}")
    return DomainError(f"non-finite equation coefficients at t={t!r}")


def accelerations(L, spec, mode, s, backend=None):
    """n complex accelerations (plus the barred ones when the state is unpaired)."""
    if simplify(L) != simplify(spec.lagrangian):
        spec = _with_lagrangian(spec, L)
    model = model_for(spec, mode, backend)
    acc = _kernels_py.Accel(model.accel_fn.kernel, spec.dof, len(model.loci), s.paired, LOCUS_GUARD, COND_MAX)
    n = spec.dof
    pos = s.z if s.paired else s.z + s.zbar
    vel = s.zdot if s.paired else s.zdot + s.zbardot
    status, a = acc(s.t, pos, vel)
    if status != kernels.OK:
        raise _raise_status(model, status, acc.fail_locus, s.t)
    return a[:n] if s.paired else a


def _with_lagrangian(spec, L):
    from dataclasses import replace

    return replace(spec, lagrangian=simplify(L))


@dataclass
class Trajectory:
    times: list
    z: list  # per sample, n complex (2n when unpaired: z then zb)
    zdot: list
    energy: list  # classical energy per sample
    paper_energy: list
    dt: float
    mode: str
    paired: bool = True
    backsub: float = 0.0
    notes: list = field(default_factory=list)

    def __len__(self):
        return len(self.times)

    @property
    def n(self):
        width = len(self.z[0]) if self.z else 0
        return width if self.paired else width // 2

    @property
    def drift(self):
        """Max relative deviation of the classical energy from its initial value."""
        if not self.energy:
            return 0.0
        e0 = self.energy[0]
        scale = abs(e0) if abs(e0) > 0 else 1.0
        return max(abs(e - e0) for e in self.energy) / scale

    def states(self):
        out = []
        n = self.n
        for t, p, v in zip(self.times, self.z, self.zdot):
            if self.paired:
                out.append(State(t, p, v))
            else:
                out.append(State(t, p[:n], v[:n], p[n:], v[n:]))
        return out

    def csv_header(self):
        cols = ["t"]
        for i in range(1, self.n + 1):
            cols += [f"re_z{i}", f"im_z{i}", f"re_zd{i}", f"im_zd{i}"]
        return cols + ["re_E", "im_E", "re_EL_paper", "im_EL_paper"]

    def csv_rows(self):
        n = self.n
        for t, p, v, e, ep in zip(self.times, self.z, self.zdot, self.energy, self.paper_energy):
            row = [t]
            for i in range(n):
                row += [p[i].real, p[i].imag, v[i].real, v[i].imag]
            row += [e.real, e.imag, ep.real, ep.imag]
            yield ["%.17g" % x for x in row]

    def write_csv(self, fh, trailer=None):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(self.csv_header())
        for row in self.csv_rows():
            w.writerow(row)
        if trailer:
            fh.write(trailer + "\n")

    def to_csv(self, trailer=None):
        buf = io.StringIO()
        self.write_csv(buf, trailer)
        return buf.getvalue()


def _energies(model, times, P, V, paired):
    n = model.n
    ec, ep = [], []
    for t, p, v in zip(times, P, V):
        if paired:
            zb = [x.conjugate() for x in p]
            zbd = [x.conjugate() for x in v]
            row = [complex(t)] + list(p) + zb + list(v) + zbd + [0j] * (2 * n)
        else:
            row = [complex(t)] + list(p[:n]) + list(p[n:]) + list(v[:n]) + list(v[n:]) + [0j] * (2 * n)
        a, b = model.energy_fn.kernel(row)
        ec.append(a)
        ep.append(b)
    return ec, ep


def step_count(t0, t_end, dt):
    span = (t_end - t0) / dt
    return max(1, int(math.floor(span + 1e-9)))


def integrate(spec, mode, s0, t_end, dt, backend=None):
    """Fixed-step RK4 from ``s0`` to ``t_end``.

    A paired initial state integrates the z-channel only and takes the barred
    channel as its conjugate; an unpaired one integrates both channels.
    Failures raise IntegrationAborted carrying the trajectory so far.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not t_end > s0.t:
        raise ValueError("t_end must be after the initial time")
    if s0.n != spec.dof:
        raise ValueError(f"initial state has {s0.n} coordinates, system has {spec.dof}")
    model = model_for(spec, mode, backend)
    nsteps = step_count(s0.t, t_end, dt)
    pos = s0.z if s0.paired else s0.z + s0.zbar
    vel = s0.zdot if s0.paired else s0.zdot + s0.zbardot
    res = model.backend.integrate(model.accel_fn.kernel, spec.dof, len(model.loci), s0.paired, float(s0.t),
                                  pos, vel, float(dt), nsteps, LOCUS_GUARD, COND_MAX)
    ec, ep = _energies(model, res["t"], res["pos"], res["vel"], s0.paired)
    traj = Trajectory(list(res["t"]), res["pos"], res["vel"], ec, ep, dt, mode, s0.paired, res["backsub"])
    if res["status"] != kernels.OK:
        t = res["fail_t"]
        cause = _raise_status(model, res["status"], res["locus"], t)
        stage = res["stage"] if res["stage"] > 0 else None
        raise IntegrationAborted(cause, t, traj, stage)
    return traj


def rk4_step(spec, mode, s, dt, backend=None):
    """One RK4 step; errors carry the failing stage."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    model = model_for(spec, mode, backend)
    pos = s.z if s.paired else s.z + s.zbar
    vel = s.zdot if s.paired else s.zdot + s.zbardot
    res = model.backend.integrate(model.accel_fn.kernel, spec.dof, len(model.loci), s.paired, float(s.t),
                                  pos, vel, float(dt), 1, LOCUS_GUARD, COND_MAX)
    if res["status"] != kernels.OK or res["steps"] < 1:
        cause = _raise_status(model, res["status"], res["locus"], res["fail_t"])
        raise IntegrationAborted(cause, res["fail_t"], None, res["stage"] if res["stage"] > 0 else None)
    p, v = res["pos"][-1], res["vel"][-1]
    n = spec.dof
    if s.paired:
        return State(s.t + dt, p, v)
    return State(s.t + dt, p[:n], v[:n], p[n:], v[n:])


def residual_series(exprs, spec, traj, backend=None):
    """Evaluate expressions (which may contain accelerations) along a trajectory.

    Accelerations at each sample are recomputed from the classical equations.
    """
    fn = Compiled(exprs, spec, backend)
    out = []
    for s in traj.states():
        a = accelerations(spec.lagrangian, spec, "classical", s, backend)
        n = spec.dof
        acc, accbar = (a, [x.conjugate() for x in a]) if s.paired else (a[:n], a[n:])
        out.append(fn(s, acc, accbar))
    return out
