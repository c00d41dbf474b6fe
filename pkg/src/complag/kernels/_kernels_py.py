"""Pure-Python numeric backend.

Programs become straight-line Python functions; the RK4 driver mirrors the
compiled one statement for statement.
"""

import cmath
import math

from ..numeric import cpow, csqrt, ipow, principal
from .tape import ADD, CONST, COS, EXP, INPUT, LN, MUL, POW, POWI, SIN, SQRT

NAME = "python"

OK, LOCUS, SINGULAR, NONFINITE = 0, 1, 2, 3


def _ipow(a, n):
    try:
        return ipow(a, n)
    except ZeroDivisionError:
        return complex(math.inf, math.nan)


def _cpow(a, b):
    try:
        return cpow(a, b)
    except (ZeroDivisionError, ValueError, OverflowError):
        return complex(math.nan, math.nan)


def _cln(a):
    if a == 0:
        return complex(-math.inf, 0.0)
    return cmath.log(principal(a))


class Kernel:
    """A program turned into ``fn(inputs) -> list of outputs``."""

    def __init__(self, prog):
        self.prog = prog
        self.n_out = len(prog.outputs)
        lines = ["def _fn(x):"]
        for i in range(len(prog.op)):
            op, a, b, k = prog.op[i], prog.a[i], prog.b[i], prog.k[i]
            if op == CONST:
                rhs = repr(prog.consts[k])
            elif op == INPUT:
                rhs = f"x[{k}]"
            elif op == ADD:
                rhs = f"r{a} + r{b}"
            elif op == MUL:
                rhs = f"r{a} * r{b}"
            elif op == POWI:
                rhs = f"_ipow(r{a}, {k})"
            elif op == POW:
                rhs = f"_cpow(r{a}, r{b})"
            elif op == SQRT:
                rhs = f"_sqrt(r{a})"
            elif op == SIN:
                rhs = f"_sin(r{a})"
            elif op == COS:
                rhs = f"_cos(r{a})"
            elif op == EXP:
                rhs = f"_exp(r{a})"
            elif op == LN:
                rhs = f"_cln(r{a})"
            else:
                raise ValueError(f"bad opcode {op}")
            lines.append(f"    r{i} = {rhs}")
        lines.append("    return [" + ", ".join(f"r{o}" for o in prog.outputs) + "]")
        env = {"_ipow": _ipow, "_cpow": _cpow, "_cln": _cln, "_sqrt": csqrt, "_sin": cmath.sin,
               "_cos": cmath.cos, "_exp": cmath.exp}
        exec(compile("\n".join(lines), "<complag-kernel>", "exec"), env)
        self._fn = env["_fn"]

    def __call__(self, inputs):
        try:
            return self._fn(inputs)
        except OverflowError:
            return [complex(math.nan, math.nan)] * self.n_out


def _finite(v):
    return math.isfinite(v.real) and math.isfinite(v.imag)


def solve_real(M, rhs, size, cond_max):
    """Solve the complex system M a = rhs as a 2*size real system.

    Returns (solution, condition estimate); solution is None when the pivot
    ratio exceeds ``cond_max``.
    """
    N = 2 * size
    A = [[0.0] * (N + 1) for _ in range(N)]
    for i in range(size):
        for j in range(size):
            m = M[i * size + j]
            A[i][j] = m.real
            A[i][j + size] = -m.imag
            A[i + size][j] = m.imag
            A[i + size][j + size] = m.real
        A[i][N] = rhs[i].real
        A[i + size][N] = rhs[i].imag
    pmax, pmin = 0.0, math.inf
    for c in range(N):
        p = max(range(c, N), key=lambda r: abs(A[r][c]))
        piv = abs(A[p][c])
        if piv == 0.0 or not math.isfinite(piv):
            return None, math.inf
        pmax, pmin = max(pmax, piv), min(pmin, piv)
        if p != c:
            A[c], A[p] = A[p], A[c]
        row = A[c]
        inv = 1.0 / row[c]
        for r in range(c + 1, N):
            f = A[r][c] * inv
            if f != 0.0:
                ar = A[r]
                for q in range(c, N + 1):
                    ar[q] -= f * row[q]
    cond = pmax / pmin
    if cond > cond_max:
        return None, cond
    x = [0.0] * N
    for r in range(N - 1, -1, -1):
        s = A[r][N]
        for q in range(r + 1, N):
            s -= A[r][q] * x[q]
        x[r] = s / A[r][r]
    return [complex(x[i], x[i + size]) for i in range(size)], cond


class Accel:
    """Accelerations from a program with outputs [b (2n), M (2n*2n), loci...]."""

    def __init__(self, kernel, n, nloci, paired, guard, cond_max):
        self.kernel = kernel
        self.n = n
        self.nloci = nloci
        self.paired = paired
        self.guard = guard
        self.cond_max = cond_max
        self.inputs = [0j] * (6 * n + 1)
        self.backsub = 0.0
        self.cond = 0.0
        self.fail_locus = -1
        self.loci = []

    def __call__(self, t, pos, vel):
        """pos/vel hold z then zb (2n each); returns (status, acc) with acc 2n long."""
        n = self.n
        x = self.inputs
        x[0] = complex(t)
        for i in range(n):
            x[1 + i] = pos[i]
            x[1 + 2 * n + i] = vel[i]
            if self.paired:
                x[1 + n + i] = pos[i].conjugate()
                x[1 + 3 * n + i] = vel[i].conjugate()
            else:
                x[1 + n + i] = pos[n + i]
                x[1 + 3 * n + i] = vel[n + i]
        out = self.kernel(x)
        size = 2 * n
        b = out[:size]
        M = out[size:size + size * size]
        loci = out[size + size * size:]
        self.loci = loci
        for j, v in enumerate(loci):
            if not abs(v) >= self.guard:
                self.fail_locus = j
                return LOCUS, None
        for v in out[: size + size * size]:
            if not _finite(v):
                return NONFINITE, None
        acc, cond = solve_real(M, [-v for v in b], size, self.cond_max)
        self.cond = cond
        if acc is None:
            return SINGULAR, None
        worst = 0.0
        for i in range(size):
            r = b[i]
            for j in range(size):
                r += M[i * size + j] * acc[j]
            worst = max(worst, abs(r) / (1.0 + abs(b[i])))
        self.backsub = max(self.backsub, worst)
        return OK, acc


def _real_locus(v):
    return abs(v.imag) <= 1e-12 * (1.0 + abs(v.real))


def integrate(kernel, n, nloci, paired, t0, pos0, vel0, dt, nsteps, guard=1e-9, cond_max=1e12):
    """Fixed-step RK4 with compensated state updates.

    ``pos0``/``vel0`` carry n values when paired (the barred channel is the
    conjugate) and 2n otherwise.  Returns a dict of results; on failure
    ``status`` is nonzero and the arrays hold the accepted steps.
    """
    acc_fn = Accel(kernel, n, nloci, paired, guard, cond_max)
    dim = n if paired else 2 * n
    pos = [complex(v) for v in pos0]
    vel = [complex(v) for v in vel0]
    cpos = [0j] * dim
    cvel = [0j] * dim
    ts = [t0]
    P = [list(pos)]
    V = [list(vel)]
    result = {"status": OK, "steps": 0, "stage": -1, "locus": -1, "fail_t": None}

    def accel(t, p, v):
        status, a = acc_fn(t, p, v)
        if status != OK:
            return status, None
        return OK, a if not paired else a[:n]

    status, k1v = accel(t0, pos, vel)
    prev_loci = list(acc_fn.loci)
    if status != OK:
        result.update(status=status, stage=1, locus=acc_fn.fail_locus, fail_t=t0)
    else:
        h = dt
        for step in range(nsteps):
            t = t0 + step * h
            k1x = vel
            p2 = [pos[i] + 0.5 * h * k1x[i] for i in range(dim)]
            v2 = [vel[i] + 0.5 * h * k1v[i] for i in range(dim)]
            status, k2v = accel(t + 0.5 * h, p2, v2)
            if status != OK:
                result.update(status=status, stage=2, locus=acc_fn.fail_locus, fail_t=t)
                break
            k2x = v2
            p3 = [pos[i] + 0.5 * h * k2x[i] for i in range(dim)]
            v3 = [vel[i] + 0.5 * h * k2v[i] for i in range(dim)]
            status, k3v = accel(t + 0.5 * h, p3, v3)
            if status != OK:
                result.update(status=status, stage=3, locus=acc_fn.fail_locus, fail_t=t)
                break
            k3x = v3
            p4 = [pos[i] + h * k3x[i] for i in range(dim)]
            v4 = [vel[i] + h * k3v[i] for i in range(dim)]
            status, k4v = accel(t + h, p4, v4)
            if status != OK:
                result.update(status=status, stage=4, locus=acc_fn.fail_locus, fail_t=t)
                break
            k4x = v4
            new_pos, new_vel = [], []
            for i in range(dim):
                dx = h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]) - cpos[i]
                s = pos[i] + dx
                cpos[i] = (s - pos[i]) - dx
                new_pos.append(s)
                dv = h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]) - cvel[i]
                s = vel[i] + dv
                cvel[i] = (s - vel[i]) - dv
                new_vel.append(s)
            # first stage of the next step; also checks the loci at the accepted state
            status, k1v = accel(t0 + (step + 1) * h, new_pos, new_vel)
            if status != OK:
                result.update(status=status, stage=1, locus=acc_fn.fail_locus, fail_t=t + h)
                break
            crossed = -1
            for j, (u, w) in enumerate(zip(prev_loci, acc_fn.loci)):
                if _real_locus(u) and _real_locus(w) and (u.real > 0) != (w.real > 0):
                    crossed = j
                    break
            if crossed >= 0:
                result.update(status=LOCUS, stage=0, locus=crossed, fail_t=t + h)
                break
            prev_loci = list(acc_fn.loci)
            pos, vel = new_pos, new_vel
            ts.append(t0 + (step + 1) * h)
            P.append(list(pos))
            V.append(list(vel))
            result["steps"] = step + 1
    result.update(t=ts, pos=P, vel=V, backsub=acc_fn.backsub, cond=acc_fn.cond)
    return result


def eval_many(kernel, rows):
    return [kernel(r) for r in rows]
