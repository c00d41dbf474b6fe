# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled numeric backend: register-program interpreter and RK4 driver in C."""

from libc.math cimport fabs, isfinite, INFINITY, NAN
from libc.stdlib cimport malloc, free

cdef extern from "complex.h" nogil:
    double complex csqrt(double complex)
    double complex csin(double complex)
    double complex ccos(double complex)
    double complex cexp(double complex)
    double complex clog(double complex)
    double creal(double complex)
    double cimag(double complex)
    double cabs(double complex)
    double complex conj(double complex)

NAME = "cython"

DEF OP_CONST = 0
DEF OP_INPUT = 1
DEF OP_ADD = 2
DEF OP_MUL = 3
DEF OP_POWI = 4
DEF OP_POW = 5
DEF OP_SQRT = 6
DEF OP_SIN = 7
DEF OP_COS = 8
DEF OP_EXP = 9
DEF OP_LN = 10
DEF MAX_INT_POWER = 1024

DEF ST_OK = 0
DEF ST_LOCUS = 1
DEF ST_SINGULAR = 2
DEF ST_NONFINITE = 3


cdef inline double complex mk(double re, double im) nogil:
    cdef double complex z
    (<double*>&z)[0] = re
    (<double*>&z)[1] = im
    return z


cdef inline double complex principal(double complex a) nogil:
    # -0.0 in the imaginary part would put sqrt/log on the wrong side of the cut
    return mk(creal(a), cimag(a) + 0.0)


cdef inline double complex c_ipow(double complex a, long n) nogil:
    cdef double complex result = mk(1.0, 0.0)
    if n < 0:
        if creal(a) == 0.0 and cimag(a) == 0.0:
            return mk(INFINITY, NAN)
        a = 1.0 / a
        n = -n
    while n:
        if n & 1:
            result = result * a
        a = a * a
        n >>= 1
    return result


cdef inline double complex c_pow(double complex a, double complex b) nogil:
    cdef double br = creal(b)
    if cimag(b) == 0.0 and br == <double>(<long>br) and fabs(br) <= MAX_INT_POWER:
        return c_ipow(a, <long>br)
    if creal(a) == 0.0 and cimag(a) == 0.0:
        if br > 0:
            return mk(0.0, 0.0)
        return mk(NAN, NAN)
    return cexp(b * clog(principal(a)))


cdef inline double complex c_ln(double complex a) nogil:
    if creal(a) == 0.0 and cimag(a) == 0.0:
        return mk(-INFINITY, 0.0)
    return clog(principal(a))


cdef class Kernel:
    """A register program; call with a sequence of inputs to get the outputs."""

    cdef int nops
    cdef int nout
    cdef int nin
    cdef int* op
    cdef int* a
    cdef int* b
    cdef long* k
    cdef int* outputs
    cdef double complex* consts
    cdef double complex* reg
    cdef public object prog

    def __cinit__(self, prog):
        cdef int i
        self.prog = prog
        self.nops = len(prog.op)
        self.nout = len(prog.outputs)
        self.nin = 6 * prog.n + 1
        self.op = <int*>malloc(max(self.nops, 1) * sizeof(int))
        self.a = <int*>malloc(max(self.nops, 1) * sizeof(int))
        self.b = <int*>malloc(max(self.nops, 1) * sizeof(int))
        self.k = <long*>malloc(max(self.nops, 1) * sizeof(long))
        self.outputs = <int*>malloc(max(self.nout, 1) * sizeof(int))
        self.consts = <double complex*>malloc(max(len(prog.consts), 1) * sizeof(double complex))
        self.reg = <double complex*>malloc(max(self.nops, 1) * sizeof(double complex))
        for i in range(self.nops):
            self.op[i] = prog.op[i]
            self.a[i] = prog.a[i]
            self.b[i] = prog.b[i]
            self.k[i] = prog.k[i]
        for i in range(self.nout):
            self.outputs[i] = prog.outputs[i]
        for i in range(len(prog.consts)):
            c = complex(prog.consts[i])
            self.consts[i] = mk(c.real, c.imag)

    def __dealloc__(self):
        free(self.op)
        free(self.a)
        free(self.b)
        free(self.k)
        free(self.outputs)
        free(self.consts)
        free(self.reg)

    cdef void run(self, const double complex* x, double complex* out) nogil:
        cdef int i, o
        cdef double complex* r = self.reg
        for i in range(self.nops):
            o = self.op[i]
            if o == OP_CONST:
                r[i] = self.consts[self.k[i]]
            elif o == OP_INPUT:
                r[i] = x[self.k[i]]
            elif o == OP_ADD:
                r[i] = r[self.a[i]] + r[self.b[i]]
            elif o == OP_MUL:
                r[i] = r[self.a[i]] * r[self.b[i]]
            elif o == OP_POWI:
                r[i] = c_ipow(r[self.a[i]], self.k[i])
            elif o == OP_POW:
                r[i] = c_pow(r[self.a[i]], r[self.b[i]])
            elif o == OP_SQRT:
                r[i] = csqrt(principal(r[self.a[i]]))
            elif o == OP_SIN:
                r[i] = csin(r[self.a[i]])
            elif o == OP_COS:
                r[i] = ccos(r[self.a[i]])
            elif o == OP_EXP:
                r[i] = cexp(r[self.a[i]])
            else:
                r[i] = c_ln(r[self.a[i]])
        for i in range(self.nout):
            out[i] = r[self.outputs[i]]

    def __call__(self, inputs):
        cdef int i
        cdef double complex* x = <double complex*>malloc(self.nin * sizeof(double complex))
        cdef double complex* out = <double complex*>malloc(max(self.nout, 1) * sizeof(double complex))
        try:
            for i in range(self.nin):
                v = complex(inputs[i])
                x[i] = mk(v.real, v.imag)
            self.run(x, out)
            return [complex(creal(out[i]), cimag(out[i])) for i in range(self.nout)]
        finally:
            free(x)
            free(out)


cdef struct Work:
    int n
    int size
    int nloci
    int paired
    double guard
    double cond_max
    double backsub
    double cond
    int fail_locus
    double complex* x
    double complex* out
    double* A
    double* sol


cdef inline bint cfinite(double complex v) nogil:
    return isfinite(creal(v)) and isfinite(cimag(v))


cdef int solve_real(Work* w, const double complex* M, const double complex* b, double complex* acc) nogil:
    """Real-ified partial-pivot elimination of M acc = -b; returns a status."""
    cdef int size = w.size
    cdef int N = 2 * size
    cdef int W = N + 1
    cdef double* A = w.A
    cdef int i, j, c, r, q, p
    cdef double piv, best, f, inv, s, tmp
    cdef double pmax = 0.0
    cdef double pmin = INFINITY
    cdef double complex m
    for i in range(size):
        for j in range(size):
            m = M[i * size + j]
            A[i * W + j] = creal(m)
            A[i * W + j + size] = -cimag(m)
            A[(i + size) * W + j] = cimag(m)
            A[(i + size) * W + j + size] = creal(m)
        A[i * W + N] = -creal(b[i])
        A[(i + size) * W + N] = -cimag(b[i])
    for c in range(N):
        p = c
        best = fabs(A[c * W + c])
        for r in range(c + 1, N):
            if fabs(A[r * W + c]) > best:
                best = fabs(A[r * W + c])
                p = r
        piv = best
        if piv == 0.0 or not isfinite(piv):
            w.cond = INFINITY
            return ST_SINGULAR
        if piv > pmax:
            pmax = piv
        if piv < pmin:
            pmin = piv
        if p != c:
            for q in range(W):
                tmp = A[c * W + q]
                A[c * W + q] = A[p * W + q]
                A[p * W + q] = tmp
        inv = 1.0 / A[c * W + c]
        for r in range(c + 1, N):
            f = A[r * W + c] * inv
            if f != 0.0:
                for q in range(c, W):
                    A[r * W + q] -= f * A[c * W + q]
    w.cond = pmax / pmin
    if w.cond > w.cond_max:
        return ST_SINGULAR
    for r in range(N - 1, -1, -1):
        s = A[r * W + N]
        for q in range(r + 1, N):
            s -= A[r * W + q] * w.sol[q]
        w.sol[r] = s / A[r * W + r]
    for i in range(size):
        acc[i] = mk(w.sol[i], w.sol[i + size])
    return ST_OK


cdef int accel(Kernel kern, Work* w, double t, const double complex* pos, const double complex* vel,
               double complex* acc) nogil:
    cdef int n = w.n
    cdef int size = w.size
    cdef int i, j
    cdef double complex* x = w.x
    cdef double complex* out = w.out
    cdef double complex r
    cdef double worst = 0.0
    cdef double dev
    x[0] = mk(t, 0.0)
    for i in range(n):
        x[1 + i] = pos[i]
        x[1 + 2 * n + i] = vel[i]
        if w.paired:
            x[1 + n + i] = conj(pos[i])
            x[1 + 3 * n + i] = conj(vel[i])
        else:
            x[1 + n + i] = pos[n + i]
            x[1 + 3 * n + i] = vel[n + i]
    kern.run(x, out)
    for j in range(w.nloci):
        if not (cabs(out[size + size * size + j]) >= w.guard):
            w.fail_locus = j
            return ST_LOCUS
    for j in range(size + size * size):
        if not cfinite(out[j]):
            return ST_NONFINITE
    if solve_real(w, out + size, out, acc) != ST_OK:
        return ST_SINGULAR
    for i in range(size):
        r = out[i]
        for j in range(size):
            r = r + out[size + i * size + j] * acc[j]
        dev = cabs(r) / (1.0 + cabs(out[i]))
        if dev > worst:
            worst = dev
    if worst > w.backsub:
        w.backsub = worst
    return ST_OK


cdef inline bint real_locus(double complex v) nogil:
    return fabs(cimag(v)) <= 1e-12 * (1.0 + fabs(creal(v)))


def integrate(Kernel kern, int n, int nloci, bint paired, double t0, pos0, vel0, double dt, long nsteps,
              double guard=1e-9, double cond_max=1e12):
    """Fixed-step RK4 with compensated state updates; same contract as the Python driver."""
    cdef int size = 2 * n
    cdef int dim = n if paired else 2 * n
    cdef int N = 2 * size
    cdef Work w
    cdef long step, saved = 0
    cdef int i, j, status = ST_OK, stage = -1, crossed
    cdef double t, h = dt
    cdef double fail_t = NAN
    cdef double complex dx, s
    w.n = n
    w.size = size
    w.nloci = nloci
    w.paired = paired
    w.guard = guard
    w.cond_max = cond_max
    w.backsub = 0.0
    w.cond = 0.0
    w.fail_locus = -1
    w.x = <double complex*>malloc((6 * n + 1) * sizeof(double complex))
    w.out = <double complex*>malloc((size + size * size + nloci + 1) * sizeof(double complex))
    w.A = <double*>malloc(N * (N + 1) * sizeof(double))
    w.sol = <double*>malloc(N * sizeof(double))
    cdef double complex* buf = <double complex*>malloc(16 * size * sizeof(double complex))
    cdef double complex* prev_loci = <double complex*>malloc((nloci + 1) * sizeof(double complex))
    cdef double complex* P = <double complex*>malloc((nsteps + 1) * dim * sizeof(double complex))
    cdef double complex* V = <double complex*>malloc((nsteps + 1) * dim * sizeof(double complex))
    cdef double complex* pos = buf
    cdef double complex* vel = buf + size
    cdef double complex* cpos = buf + 2 * size
    cdef double complex* cvel = buf + 3 * size
    cdef double complex* k1v = buf + 4 * size
    cdef double complex* k2v = buf + 5 * size
    cdef double complex* k3v = buf + 6 * size
    cdef double complex* k4v = buf + 7 * size
    cdef double complex* p2 = buf + 8 * size
    cdef double complex* v2 = buf + 9 * size
    cdef double complex* p3 = buf + 10 * size
    cdef double complex* v3 = buf + 11 * size
    cdef double complex* p4 = buf + 12 * size
    cdef double complex* v4 = buf + 13 * size
    cdef double complex* npos = buf + 14 * size
    cdef double complex* nvel = buf + 15 * size
    cdef double complex* locs
    try:
        for i in range(dim):
            v = complex(pos0[i])
            pos[i] = mk(v.real, v.imag)
            v = complex(vel0[i])
            vel[i] = mk(v.real, v.imag)
            cpos[i] = mk(0.0, 0.0)
            cvel[i] = mk(0.0, 0.0)
            P[i] = pos[i]
            V[i] = vel[i]
        locs = w.out + size + size * size
        with nogil:
            status = accel(kern, &w, t0, pos, vel, k1v)
            for j in range(nloci):
                prev_loci[j] = locs[j]
            if status != ST_OK:
                stage = 1
                fail_t = t0
            else:
                for step in range(nsteps):
                    t = t0 + step * h
                    for i in range(dim):
                        p2[i] = pos[i] + 0.5 * h * vel[i]
                        v2[i] = vel[i] + 0.5 * h * k1v[i]
                    status = accel(kern, &w, t + 0.5 * h, p2, v2, k2v)
                    if status != ST_OK:
                        stage = 2
                        fail_t = t
                        break
                    for i in range(dim):
                        p3[i] = pos[i] + 0.5 * h * v2[i]
                        v3[i] = vel[i] + 0.5 * h * k2v[i]
                    status = accel(kern, &w, t + 0.5 * h, p3, v3, k3v)
                    if status != ST_OK:
                        stage = 3
                        fail_t = t
                        break
                    for i in range(dim):
                        p4[i] = pos[i] + h * v3[i]
                        v4[i] = vel[i] + h * k3v[i]
                    status = accel(kern, &w, t + h, p4, v4, k4v)
                    if status != ST_OK:
                        stage = 4
                        fail_t = t
                        break
                    for i in range(dim):
                        dx = h / 6.0 * (vel[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]) - cpos[i]
                        s = pos[i] + dx
                        cpos[i] = (s - pos[i]) - dx
                        npos[i] = s
                        dx = h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]) - cvel[i]
                        s = vel[i] + dx
                        cvel[i] = (s - vel[i]) - dx
                        nvel[i] = s
                    status = accel(kern, &w, t0 + (step + 1) * h, npos, nvel, k1v)
                    if status != ST_OK:
                        stage = 1
                        fail_t = t + h
                        break
                    crossed = -1
                    for j in range(nloci):
                        if real_locus(prev_loci[j]) and real_locus(locs[j]) and \
                                ((creal(prev_loci[j]) > 0) != (creal(locs[j]) > 0)):
                            crossed = j
                            break
                    if crossed >= 0:
                        status = ST_LOCUS
                        w.fail_locus = crossed
                        stage = 0
                        fail_t = t + h
                        break
                    for j in range(nloci):
                        prev_loci[j] = locs[j]
                    for i in range(dim):
                        pos[i] = npos[i]
                        vel[i] = nvel[i]
                        P[(step + 1) * dim + i] = pos[i]
                        V[(step + 1) * dim + i] = vel[i]
                    saved = step + 1
        ts = [t0 + k * h if k else t0 for k in range(saved + 1)]
        Pl = [[complex(creal(P[k * dim + i]), cimag(P[k * dim + i])) for i in range(dim)] for k in range(saved + 1)]
        Vl = [[complex(creal(V[k * dim + i]), cimag(V[k * dim + i])) for i in range(dim)] for k in range(saved + 1)]
        return {
            "status": status,
            "steps": saved,
            "stage": stage,
            "locus": w.fail_locus if status == ST_LOCUS else -1,
            "fail_t": None if status == ST_OK else fail_t,
            "t": ts,
            "pos": Pl,
            "vel": Vl,
            "backsub": w.backsub,
            "cond": w.cond,
        }
    finally:
        free(w.x)
        free(w.out)
        free(w.A)
        free(w.sol)
        free(buf)
        free(prev_loci)
        free(P)
        free(V)


def eval_many(Kernel kern, rows):
    return [kern(r) for r in rows]
