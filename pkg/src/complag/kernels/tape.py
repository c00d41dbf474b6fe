"""Lower canonical expressions to a flat register program.

A program is five parallel integer arrays (op, dst, a, b, k) plus a table of
complex constants.  Shared subtrees are computed once.  Both numeric backends
run the same program, so they agree to roundoff.

Input slots for a system with n degrees of freedom:
    0: t, then z, zb, zd, zbd, zdd, zbdd (n each).
"""

from __future__ import annotations

from ..errors import UnboundSymbol
from ..expr import Add, Const, Coord, Func, ImagUnit, Mul, Param, Pow, Role, Time, simplify

CONST, INPUT, ADD, MUL, POWI, POW, SQRT, SIN, COS, EXP, LN = range(11)
UNARY = {"sqrt": SQRT, "sin": SIN, "cos": COS, "exp": EXP, "ln": LN}
OPNAMES = ["CONST", "INPUT", "ADD", "MUL", "POWI", "POW", "SQRT", "SIN", "COS", "EXP", "LN"]
MAX_INT_POWER = 1024

ROLE_BLOCK = {
    Role.Z: 0,
    Role.ZBAR: 1,
    Role.ZDOT: 2,
    Role.ZBARDOT: 3,
    Role.ZDDOT: 4,
    Role.ZBARDDOT: 5,
}


def input_size(n):
    return 6 * n + 1


def slot(role, index, n):
    return 1 + ROLE_BLOCK[role] * n + (index - 1)


class Program:
    def __init__(self, n):
        self.n = n
        self.op, self.dst, self.a, self.b, self.k = [], [], [], [], []
        self.consts = []
        self.outputs = []
        self._memo = {}
        self._const_index = {}

    @property
    def nreg(self):
        return len(self.op)

    def __len__(self):
        return len(self.op)

    def _emit(self, op, a=0, b=0, k=0):
        r = len(self.op)
        self.op.append(op)
        self.dst.append(r)
        self.a.append(a)
        self.b.append(b)
        self.k.append(k)
        return r

    def _const(self, value):
        value = complex(value)
        key = (value.real, value.imag)
        if key not in self._const_index:
            self._const_index[key] = len(self.consts)
            self.consts.append(value)
        return self._emit(CONST, k=self._const_index[key])

    def lower(self, e, params):
        hit = self._memo.get(e)
        if hit is not None:
            return hit
        if isinstance(e, Const):
            r = self._const(complex(e))
        elif isinstance(e, ImagUnit):
            r = self._const(1j)
        elif isinstance(e, Param):
            if e.name not in params:
                raise UnboundSymbol(e)
            r = self._const(params[e.name])
        elif isinstance(e, Time):
            r = self._emit(INPUT, k=0)
        elif isinstance(e, Coord):
            if e.role not in ROLE_BLOCK or not 1 <= e.index <= self.n:
                raise UnboundSymbol(e)
            r = self._emit(INPUT, k=slot(e.role, e.index, self.n))
        elif isinstance(e, (Add, Mul)):
            parts = e.terms if isinstance(e, Add) else e.factors
            op = ADD if isinstance(e, Add) else MUL
            r = self.lower(parts[0], params)
            for p in parts[1:]:
                r = self._emit(op, r, self.lower(p, params))
        elif isinstance(e, Pow):
            base = self.lower(e.base, params)
            x = e.exp
            if isinstance(x, Const) and x.is_integer() and abs(int(x.re)) <= MAX_INT_POWER:
                r = self._emit(POWI, base, k=int(x.re))
            else:
                r = self._emit(POW, base, self.lower(x, params))
        elif isinstance(e, Func):
            r = self._emit(UNARY[e.name], self.lower(e.arg, params))
        else:
            raise TypeError(f"cannot compile node {e!r}")
        self._memo[e] = r
        return r

    def listing(self):
        rows = []
        for i in range(len(self.op)):
            rows.append(f"r{i} = {OPNAMES[self.op[i]]} a={self.a[i]} b={self.b[i]} k={self.k[i]}")
        return "\n".join(rows)


def compile_program(exprs, n, params):
    """Program whose outputs are ``exprs`` with parameters baked in as constants."""
    prog = Program(n)
    params = {k: complex(v) for k, v in params.items()}
    prog.outputs = [prog.lower(simplify(e), params) for e in exprs]
    return prog
