"""Numeric evaluation of expression trees and the randomized equality oracle."""

from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass, field

from .errors import AllSamplesRejected, ComplagError, DivisionByZero, DomainError, UnboundSymbol
from .expr import (
    Add,
    Conj,
    Const,
    Coord,
    Div,
    Func,
    ImagUnit,
    Mul,
    Neg,
    Param,
    Pow,
    Role,
    Time,
    free_symbols,
    symbol,
)

MAX_INT_POWER = 1024


def ipow(a, n):
    """Integer power by repeated squaring (same recipe as the compiled kernel)."""
    if n < 0:
        if a == 0:
            raise DivisionByZero("zero raised to a negative power")
        a, n = 1 / a, -n
    result = 1 + 0j
    while n:
        if n & 1:
            result *= a
        a *= a
        n >>= 1
    return result


def principal(a):
    """Clear a negative-zero imaginary part so branch cuts resolve to the principal side."""
    a = complex(a)
    return complex(a.real, a.imag + 0.0)


def cpow(a, b):
    """Principal-branch complex power."""
    if b.imag == 0 and b.real.is_integer() and abs(b.real) <= MAX_INT_POWER:
        return ipow(complex(a), int(b.real))
    if a == 0:
        if b.real > 0:
            return 0j
        raise DomainError(f"0 raised to {b}")
    return cmath.exp(b * cmath.log(principal(a)))


def cln(a):
    if a == 0:
        raise DomainError("ln(0)")
    return cmath.log(principal(a))


def csqrt(a):
    return cmath.sqrt(principal(a))


FUNCS = {
    "sqrt": csqrt,
    "sin": cmath.sin,
    "cos": cmath.cos,
    "exp": cmath.exp,
    "ln": cln,
}


def normalize_point(point):
    out = {}
    for k, v in point.items():
        if isinstance(k, str):
            k = symbol(k)
        out[k] = complex(v)
    return out


def evaluate(e, point):
    """Evaluate ``e`` with every free symbol bound to a number in ``point``.

    Keys may be symbols or their ASCII names.  sqrt, ln and non-integer powers
    take the principal branch.
    """
    values = normalize_point(point)
    memo = {}

    def ev(node):
        hit = memo.get(id(node))
        if hit is not None:
            return hit
        if isinstance(node, Const):
            out = complex(node)
        elif isinstance(node, ImagUnit):
            out = 1j
        elif isinstance(node, (Param, Coord, Time)):
            try:
                out = values[node]
            except KeyError:
                raise UnboundSymbol(node) from None
        elif isinstance(node, Add):
            out = 0j
            for t in node.terms:
                out += ev(t)
        elif isinstance(node, Mul):
            out = 1 + 0j
            for f in node.factors:
                out *= ev(f)
        elif isinstance(node, Pow):
            out = cpow(ev(node.base), ev(node.exp))
        elif isinstance(node, Div):
            den = ev(node.den)
            if den == 0:
                raise DivisionByZero("division by zero")
            out = ev(node.num) / den
        elif isinstance(node, Neg):
            out = -ev(node.arg)
        elif isinstance(node, Func):
            out = FUNCS[node.name](ev(node.arg))
        elif isinstance(node, Conj):
            out = ev(node.arg).conjugate()
        else:
            raise TypeError(f"not an expression: {node!r}")
        memo[id(node)] = out
        return out

    try:
        return ev(e)
    except ZeroDivisionError as exc:
        if isinstance(exc, DivisionByZero):
            raise
        raise DivisionByZero(str(exc)) from None
    except OverflowError as exc:
        raise DomainError(str(exc)) from None


# ---------------------------------------------------------------------------
# sampling


@dataclass
class SamplingDomain:
    """Where random points are drawn from.

    ``boxes`` maps an unbarred coordinate name (``z1``, ``zd1``) to
    ``((re_lo, re_hi), (im_lo, im_hi))``; with ``conj_pairs`` the barred
    partner is set to the complex conjugate.  ``params`` fixes parameter
    values; unfixed parameters are drawn from ``param_range``.  Points where
    any expression in ``loci`` has magnitude below ``guard`` are rejected.
    """

    boxes: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    loci: list = field(default_factory=list)
    conj_pairs: bool = True
    default_box: tuple = ((-2.0, 2.0), (-2.0, 2.0))
    param_range: tuple = (0.5, 2.0)
    time_range: tuple = (0.0, 1.0)
    guard: float = 1e-6

    def sample(self, symbols, rng):
        point = {}
        symbols = sorted(symbols, key=lambda s: s.key())
        for s in symbols:
            if s in point:
                continue
            if isinstance(s, Param):
                if s.name in self.params:
                    point[s] = complex(self.params[s.name])
                else:
                    point[s] = complex(rng.uniform(*self.param_range))
            elif isinstance(s, Time):
                point[s] = complex(rng.uniform(*self.time_range))
            elif isinstance(s, Coord):
                role = s.role
                if self.conj_pairs and (role.barred or role.is_real):
                    continue
                (rlo, rhi), (ilo, ihi) = self.boxes.get(s.name, self.default_box)
                point[s] = complex(rng.uniform(rlo, rhi), rng.uniform(ilo, ihi))
        for s in symbols:
            if isinstance(s, Coord) and s not in point:
                if s.role.is_real:
                    point[s] = complex(rng.uniform(*self.boxes.get(s.name, self.default_box)[0]))
                else:
                    partner = Coord(s.role.conjugate, s.index)
                    if partner not in point:
                        (rlo, rhi), (ilo, ihi) = self.boxes.get(partner.name, self.default_box)
                        point[partner] = complex(rng.uniform(rlo, rhi), rng.uniform(ilo, ihi))
                    point[s] = point[partner].conjugate()
        return point

    def admissible(self, point):
        for locus in self.loci:
            try:
                if abs(evaluate(locus, point)) < self.guard:
                    return False
            except ComplagError:
                return False
        return True

    def symbols_for(self, *exprs):
        syms = set()
        for e in list(exprs) + list(self.loci):
            syms |= free_symbols(e)
        return syms


@dataclass
class EqualityReport:
    equal: bool
    max_deviation: float
    argmax: dict
    samples: int
    rejected: int
    tol: float

    def format_point(self):
        return format_point(self.argmax)


def format_point(point):
    def name(s):
        return s.name if isinstance(s, (Param, Coord)) else "t"

    items = sorted(point.items(), key=lambda kv: kv[0].key())
    return ", ".join(f"{name(k)}={complex_repr(v)}" for k, v in items)


def complex_repr(v):
    v = complex(v)
    return f"({v.real!r}{'+' if v.imag >= 0 or math.isnan(v.imag) else '-'}{abs(v.imag)!r}j)"


def relative_deviation(a, b):
    return abs(a - b) / (1 + abs(a))


def sample_points(exprs, domain, trials, seed=0, max_retries=None):
    """Draw ``trials`` admissible points at which every expression evaluates.

    Returns (points, values, rejected) where values[k][j] is expression j at
    point k.  Evaluation failures and locus hits are resampled, up to
    ``max_retries`` attempts in total.
    """
    rng = random.Random(seed)
    syms = domain.symbols_for(*exprs)
    if max_retries is None:
        max_retries = 50 * trials + 100
    points, values, rejected = [], [], 0
    attempts = 0
    while len(points) < trials and attempts < max_retries:
        attempts += 1
        point = domain.sample(syms, rng)
        if not domain.admissible(point):
            rejected += 1
            continue
        try:
            vals = [evaluate(e, point) for e in exprs]
        except ComplagError:
            rejected += 1
            continue
        if not all(cmath.isfinite(v) for v in vals):
            rejected += 1
            continue
        points.append(point)
        values.append(vals)
    if not points:
        raise AllSamplesRejected(f"no admissible sample point after {attempts} attempts")
    return points, values, rejected


def equal_numeric(e1, e2, trials=100, tol=1e-12, domain=None, seed=0):
    """Randomized numeric equality: ``|e1 - e2| / (1 + |e1|) <= tol`` at every sample."""
    domain = domain or SamplingDomain()
    points, values, rejected = sample_points([e1, e2], domain, trials, seed)
    worst, worst_point = -1.0, None
    for point, (a, b) in zip(points, values):
        dev = relative_deviation(a, b)
        if dev > worst:
            worst, worst_point = dev, point
    return EqualityReport(worst <= tol, worst, worst_point, len(points), rejected, tol)


__all__ = [
    "evaluate",
    "cpow",
    "ipow",
    "SamplingDomain",
    "EqualityReport",
    "equal_numeric",
    "sample_points",
    "relative_deviation",
    "format_point",
    "complex_repr",
    "Role",
]
