"""Wirtinger partial derivatives, total time derivative and the real chart.

z, zb, zd and zbd are mutually independent symbols, so d(zb)/d(z) = 0.  A
``conj(...)`` wrapper is rewritten into barred symbols by ``simplify`` before
any derivative is taken.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import OrderOverflow
from .expr import (
    HALF,
    I,
    MINUS_ONE,
    ONE,
    ZERO,
    Add,
    Const,
    Coord,
    Func,
    Mul,
    Param,
    Pow,
    Role,
    Time,
    add,
    expand,
    free_symbols,
    func,
    map_symbols,
    mul,
    power,
    simplify,
    symbol,
)
from .numeric import evaluate, normalize_point

REAL_PAIR = {
    Role.Z: (Role.X, Role.Y),
    Role.ZBAR: (Role.X, Role.Y),
    Role.ZDOT: (Role.XDOT, Role.YDOT),
    Role.ZBARDOT: (Role.XDOT, Role.YDOT),
    Role.ZDDOT: (Role.XDDOT, Role.YDDOT),
    Role.ZBARDDOT: (Role.XDDOT, Role.YDDOT),
}


def as_variable(v):
    if isinstance(v, str):
        v = symbol(v)
    if not isinstance(v, (Coord, Param, Time)):
        raise TypeError(f"cannot differentiate with respect to {v!r}")
    return v


def partial(e, v):
    """Partial derivative of ``e`` with respect to the symbol ``v``; simplified."""
    return _d(simplify(e), as_variable(v))


@lru_cache(maxsize=500_000)
def _d(e, v):
    if e == v:
        return ONE
    if isinstance(e, (Const, Param, Time, Coord)):
        return ZERO
    if v not in free_symbols(e):
        return ZERO
    if isinstance(e, Add):
        return add(*(_d(t, v) for t in e.terms))
    if isinstance(e, Mul):
        fs = e.factors
        terms = []
        for k, f in enumerate(fs):
            df = _d(f, v)
            if df != ZERO:
                terms.append(mul(df, *fs[:k], *fs[k + 1:]))
        return add(*terms)
    if isinstance(e, Pow):
        b, x = e.base, e.exp
        db = _d(b, v)
        dx = _d(x, v)
        out = []
        if db != ZERO:
            out.append(mul(x, power(b, add(x, MINUS_ONE)), db))
        if dx != ZERO:
            out.append(mul(e, func("ln", b), dx))
        return add(*out)
    if isinstance(e, Func):
        a = e.arg
        da = _d(a, v)
        if e.name == "sqrt":
            return mul(HALF, power(e, MINUS_ONE), da)
        if e.name == "sin":
            return mul(func("cos", a), da)
        if e.name == "cos":
            return mul(MINUS_ONE, func("sin", a), da)
        if e.name == "exp":
            return mul(e, da)
        if e.name == "ln":
            return mul(power(a, MINUS_ONE), da)
    raise TypeError(f"unexpected node in canonical tree: {e!r}")


def gradient(e, variables):
    return [partial(e, v) for v in variables]


def time_derivative(e):
    """Total d/dt along a trajectory: z -> zd, zd -> zdd, parameters constant."""
    e = simplify(e)
    syms = free_symbols(e)
    terms = []
    for s in sorted(syms, key=lambda s: s.key()):
        if isinstance(s, Coord):
            nxt = s.role.dot
            if nxt is None:
                raise OrderOverflow(f"{s.name} is already a second time derivative")
            terms.append(mul(_d(e, s), Coord(nxt, s.index)))
        elif isinstance(s, Time):
            terms.append(_d(e, s))
    return add(*terms)


def to_real_chart(e, expand_result=True):
    """Substitute z = x + I*y, zb = x - I*y (and the dotted analogues)."""

    def chart(s):
        if isinstance(s, Coord) and s.role in REAL_PAIR:
            xr, yr = REAL_PAIR[s.role]
            x, y = Coord(xr, s.index), Coord(yr, s.index)
            sign = MINUS_ONE if s.role.barred else ONE
            return add(x, mul(sign, I, y))
        return None

    out = map_symbols(e, chart)
    return expand(out) if expand_result else out


@dataclass
class FDReport:
    symbolic: complex
    finite_difference: complex
    deviation: float
    relative: float

    @property
    def scale(self):
        return 1 + abs(self.symbolic)


def _real_point(point):
    """Real-chart values (x, y, xd, yd, ...) from a conj-paired complex point."""
    vals = {}
    for s, v in point.items():
        if isinstance(s, Coord) and s.role in REAL_PAIR and not s.role.barred:
            xr, yr = REAL_PAIR[s.role]
            vals[Coord(xr, s.index)] = complex(v.real)
            vals[Coord(yr, s.index)] = complex(v.imag)
        elif not isinstance(s, Coord):
            vals[s] = v
    return vals


def wirtinger_fd_check(e, v, point, step=1e-5, chart=None):
    """Compare ``partial(e, v)`` with a central-difference Wirtinger derivative.

    ``point`` gives the unbarred coordinates (barred ones are taken as their
    conjugates) and parameter values.  The finite difference is taken on the
    real chart: d/dz = (d/dx - I d/dy)/2, d/dzb = (d/dx + I d/dy)/2.
    """
    v = as_variable(v)
    if not isinstance(v, Coord) or v.role not in REAL_PAIR:
        raise TypeError("the finite-difference check needs a complex coordinate variable")
    point = normalize_point(point)
    full = dict(point)
    for s in list(point):
        if isinstance(s, Coord) and s.role in REAL_PAIR and not s.role.barred:
            full[Coord(s.role.conjugate, s.index)] = point[s].conjugate()
    symbolic = evaluate(partial(e, v), full)
    real_e = chart if chart is not None else to_real_chart(e, expand_result=False)
    base = _real_point(full)
    xr, yr = REAL_PAIR[v.role]
    x, y = Coord(xr, v.index), Coord(yr, v.index)

    def central(sym):
        hi, lo = dict(base), dict(base)
        hi[sym] = base.get(sym, 0j) + step
        lo[sym] = base.get(sym, 0j) - step
        return (evaluate(real_e, hi) - evaluate(real_e, lo)) / (2 * step)

    if free_symbols(real_e) & {x, y}:
        dx, dy = central(x), central(y)
    else:
        dx = dy = 0j
    sign = 1 if v.role.barred else -1
    fd = 0.5 * (dx + sign * 1j * dy)
    dev = abs(symbolic - fd)
    return FDReport(symbolic, fd, dev, dev / (1 + abs(symbolic)))
