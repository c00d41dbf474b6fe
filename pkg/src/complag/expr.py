"""Immutable expression trees over complex coordinates.

Two layers live here.  The node classes (``Const``, ``Add``, ``Neg``, ...) are
plain immutable records; the parser builds them verbatim.  The lower-case
constructors (``add``, ``mul``, ``power``, ``func``) assume canonical inputs
and always return canonical trees, and ``simplify`` rebuilds an arbitrary tree
through them.

Canonical trees use only ``Const``, ``Param``, ``Time``, ``Coord``, ``Add``,
``Mul``, ``Pow`` and ``Func``.  Sums and products are flattened and sorted by
``Expr.key``; like terms and like bases are collected; a numeric coefficient
is always the first factor of a product; a numeric coefficient never
multiplies a bare sum (it is distributed); and a sum appearing as a product
factor or under an integer power has a "positive" leading term (the sign is
pulled into the coefficient).

Node order: constants < parameters (by name) < t < coordinates < composites.
Coordinates sort by role, then index, with roles ordered highest time
derivative first (``zdd < zbdd < zd < zbd < z < zb``, then the real-chart
roles in the same pattern).  Composites sort by kind (sum, product, power,
function), then children.
"""

from __future__ import annotations

import enum
import math
from fractions import Fraction
from functools import lru_cache

from .errors import CyclicBinding

MAX_FOLD_EXPONENT = 64


class Role(enum.Enum):
    # value = (printed prefix, conjugate partner name, time-derivative name, order)
    ZDDOT = ("zdd", "ZBARDDOT", None, 2)
    ZBARDDOT = ("zbdd", "ZDDOT", None, 2)
    ZDOT = ("zd", "ZBARDOT", "ZDDOT", 1)
    ZBARDOT = ("zbd", "ZDOT", "ZBARDDOT", 1)
    Z = ("z", "ZBAR", "ZDOT", 0)
    ZBAR = ("zb", "Z", "ZBARDOT", 0)
    XDDOT = ("xdd", "XDDOT", None, 2)
    YDDOT = ("ydd", "YDDOT", None, 2)
    XDOT = ("xd", "XDOT", "XDDOT", 1)
    YDOT = ("yd", "YDOT", "YDDOT", 1)
    X = ("x", "X", "XDOT", 0)
    Y = ("y", "Y", "YDOT", 0)

    @property
    def prefix(self):
        return self.value[0]

    @property
    def conjugate(self):
        return Role[self.value[1]]

    @property
    def dot(self):
        name = self.value[2]
        return None if name is None else Role[name]

    @property
    def order(self):
        return self.value[3]

    @property
    def rank(self):
        return _ROLE_RANK[self]

    @property
    def is_real(self):
        return self.prefix[0] in "xy"

    @property
    def barred(self):
        return self in (Role.ZBAR, Role.ZBARDOT, Role.ZBARDDOT)


_ROLE_RANK = {role: i for i, role in enumerate(Role)}
ROLE_BY_PREFIX = {role.prefix: role for role in Role}
COMPLEX_ROLES = (Role.Z, Role.ZBAR, Role.ZDOT, Role.ZBARDOT, Role.ZDDOT, Role.ZBARDDOT)

FUNCTIONS = ("sqrt", "sin", "cos", "exp", "ln")


# ---------------------------------------------------------------------------
# exact complex rationals, as (re, im) pairs of Fractions


def _cadd(a, b):
    return (a[0] + b[0], a[1] + b[1])


def _cmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _cinv(a):
    d = a[0] * a[0] + a[1] * a[1]
    return (a[0] / d, -a[1] / d)


def _cpowi(a, n):
    if n < 0:
        a, n = _cinv(a), -n
    result = (Fraction(1), Fraction(0))
    while n:
        if n & 1:
            result = _cmul(result, a)
        a = _cmul(a, a)
        n >>= 1
    return result


def _negative(c):
    """Sign convention for complex coefficients: re < 0, or re == 0 and im < 0."""
    return c[0] < 0 or (c[0] == 0 and c[1] < 0)


# ---------------------------------------------------------------------------
# node classes


class Expr:
    __slots__ = ("_key", "_hash")

    def __init__(self):
        self._key = None
        self._hash = None

    @property
    def args(self):
        return ()

    def key(self):
        if self._key is None:
            self._key = self._make_key()
        return self._key

    def _make_key(self):
        raise NotImplementedError

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key())
        return self._hash

    def __lt__(self, other):
        return self.key() < other.key()

    def __setattr__(self, name, value):
        if name in ("_key", "_hash") or not hasattr(self, "_hash"):
            object.__setattr__(self, name, value)
        else:
            raise AttributeError(f"{type(self).__name__} is immutable")

    def __repr__(self):
        from .printer import print_expr

        return f"<{type(self).__name__} {print_expr(self)}>"

    def __str__(self):
        from .printer import print_expr

        return print_expr(self)

    # arithmetic operators build canonical trees
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, negate(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), negate(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), MINUS_ONE))

    def __rtruediv__(self, other):
        return mul(as_expr(other), power(self, MINUS_ONE))

    def __pow__(self, other):
        return power(self, as_expr(other))

    def __rpow__(self, other):
        return power(as_expr(other), self)

    def __neg__(self):
        return negate(self)


class Const(Expr):
    __slots__ = ("re", "im")

    def __init__(self, re, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)
        super().__init__()

    @property
    def value(self):
        return (self.re, self.im)

    def _make_key(self):
        return (0, self.re, self.im)

    def is_integer(self):
        return self.im == 0 and self.re.denominator == 1

    def is_real(self):
        return self.im == 0

    def __complex__(self):
        return complex(float(self.re), float(self.im))


class ImagUnit(Expr):
    """The literal ``I`` as written; canonical trees fold it into ``Const(0, 1)``."""

    __slots__ = ()

    def _make_key(self):
        return (1,)


class Param(Expr):
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name
        super().__init__()

    def _make_key(self):
        return (2, self.name)


class Time(Expr):
    __slots__ = ()

    def _make_key(self):
        return (3,)


class Coord(Expr):
    __slots__ = ("role", "index")

    def __init__(self, role, index):
        if index < 1:
            raise ValueError(f"coordinate index must be >= 1, got {index}")
        self.role = role
        self.index = index
        super().__init__()

    @property
    def name(self):
        return f"{self.role.prefix}{self.index}"

    def _make_key(self):
        return (4, self.role.rank, self.index)


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms):
        self.terms = tuple(terms)
        super().__init__()

    @property
    def args(self):
        return self.terms

    def _make_key(self):
        return (5, 0, tuple(t.key() for t in self.terms))


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors):
        self.factors = tuple(factors)
        super().__init__()

    @property
    def args(self):
        return self.factors

    def _make_key(self):
        return (5, 1, tuple(f.key() for f in self.factors))


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base, exp):
        self.base = base
        self.exp = exp
        super().__init__()

    @property
    def args(self):
        return (self.base, self.exp)

    def _make_key(self):
        return (5, 2, (self.base.key(), self.exp.key()))


class Func(Expr):
    __slots__ = ("name", "arg")

    def __init__(self, name, arg):
        if name not in FUNCTIONS:
            raise ValueError(f"unknown function {name!r}")
        self.name = name
        self.arg = arg
        super().__init__()

    @property
    def args(self):
        return (self.arg,)

    def _make_key(self):
        return (5, 3, (self.name, self.arg.key()))


class Div(Expr):
    __slots__ = ("num", "den")

    def __init__(self, num, den):
        self.num = num
        self.den = den
        super().__init__()

    @property
    def args(self):
        return (self.num, self.den)

    def _make_key(self):
        return (5, 4, (self.num.key(), self.den.key()))


class Neg(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg):
        self.arg = arg
        super().__init__()

    @property
    def args(self):
        return (self.arg,)

    def _make_key(self):
        return (5, 5, self.arg.key())


class Conj(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg):
        self.arg = arg
        super().__init__()

    @property
    def args(self):
        return (self.arg,)

    def _make_key(self):
        return (5, 6, self.arg.key())


ZERO = Const(0)
ONE = Const(1)
MINUS_ONE = Const(-1)
HALF = Const(Fraction(1, 2))
I = Const(0, 1)
T = Time()

SYMBOL_TYPES = (Param, Time, Coord)


def as_expr(value):
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction)):
        return Const(value)
    if isinstance(value, complex):
        return Const(Fraction(value.real), Fraction(value.imag))
    if isinstance(value, float):
        return Const(Fraction(value))
    if isinstance(value, str):
        return symbol(value)
    raise TypeError(f"cannot convert {value!r} to an expression")


def coord(role, index):
    if isinstance(role, str):
        role = ROLE_BY_PREFIX[role]
    return Coord(role, index)


def symbol(name):
    """Symbol for an ASCII name: ``z1``, ``zbd2``, ``x1``, ``t`` or a parameter."""
    if name == "t":
        return T
    role, index = split_coord_name(name)
    if role is not None:
        return Coord(role, index)
    return Param(name)


def split_coord_name(name):
    stem = name.rstrip("0123456789")
    digits = name[len(stem):]
    if digits and stem in ROLE_BY_PREFIX and not digits.startswith("0"):
        return ROLE_BY_PREFIX[stem], int(digits)
    return None, None


def is_number(e):
    return isinstance(e, Const)


# ---------------------------------------------------------------------------
# canonical constructors


def _split_term(t):
    """Split a canonical term into (coefficient, body); body None for constants."""
    if isinstance(t, Const):
        return t.value, None
    if isinstance(t, Mul) and isinstance(t.factors[0], Const):
        rest = t.factors[1:]
        return t.factors[0].value, rest[0] if len(rest) == 1 else Mul(rest)
    return (Fraction(1), Fraction(0)), t


def _scale(c, body):
    """Canonical c*body for a canonical non-constant, non-sum body."""
    if c == (1, 0):
        return body
    if isinstance(body, Mul):
        return Mul((Const(*c),) + body.factors)
    return Mul((Const(*c), body))


def add(*terms):
    const = (Fraction(0), Fraction(0))
    coeffs = {}
    stack = [as_expr(t) for t in terms]
    while stack:
        t = stack.pop()
        if isinstance(t, Add):
            stack.extend(t.terms)
            continue
        c, body = _split_term(t)
        if body is None:
            const = _cadd(const, c)
        elif body in coeffs:
            coeffs[body] = _cadd(coeffs[body], c)
        else:
            coeffs[body] = c
    out = [_scale(c, body) for body, c in sorted(coeffs.items(), key=lambda kv: kv[0].key()) if c != (0, 0)]
    if const != (0, 0):
        out.insert(0, Const(*const))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return Add(out)


def _gauss_divround(a, b):
    # nearest Gaussian integer to a / b
    n = b[0] * b[0] + b[1] * b[1]
    re = a[0] * b[0] + a[1] * b[1]
    im = a[1] * b[0] - a[0] * b[1]
    return ((2 * re + n) // (2 * n), (2 * im + n) // (2 * n))


def _gauss_gcd(a, b):
    while b != (0, 0):
        q = _gauss_divround(a, b)
        r = (a[0] - (q[0] * b[0] - q[1] * b[1]), a[1] - (q[0] * b[1] + q[1] * b[0]))
        a, b = b, r
    return a


_UNITS = ((1, 0), (0, 1), (-1, 0), (0, -1))


@lru_cache(maxsize=200_000)
def _content(s):
    """Gaussian-rational content of a sum: gcd of its coefficients, unit chosen
    so the leading coefficient of the primitive part has re > 0, im >= 0."""
    coeffs = [_split_term(t)[0] for t in s.terms]
    den = 1
    for re, im in coeffs:
        den = math.lcm(den, re.denominator, im.denominator)
    g = (0, 0)
    for re, im in coeffs:
        g = _gauss_gcd(g, (int(re * den), int(im * den)))
    c0 = coeffs[0]
    lead = (int(c0[0] * den), int(c0[1] * den))
    for u in _UNITS:
        gu = (g[0] * u[0] - g[1] * u[1], g[0] * u[1] + g[1] * u[0])
        w = _gauss_divround(lead, gu)
        if w[0] > 0 and w[1] >= 0:
            return (Fraction(gu[0], den), Fraction(gu[1], den))
    raise AssertionError("no unit normalizes the leading coefficient")


def _primitive(s):
    """(content, primitive part) of a canonical sum."""
    c = _content(s)
    if c == (1, 0):
        return c, s
    inv = Const(*_cinv(c))
    return c, add(*(mul(inv, t) for t in s.terms))


def _factor_key(f):
    if isinstance(f, Pow):
        return (f.base.key(), f.exp.key())
    return (f.key(), ONE.key())


def mul(*factors):
    coeff = (Fraction(1), Fraction(0))
    bases = {}
    stack = [as_expr(f) for f in factors]
    while stack:
        f = stack.pop()
        if isinstance(f, Const):
            coeff = _cmul(coeff, f.value)
            continue
        if isinstance(f, Mul):
            stack.extend(f.factors)
            continue
        if isinstance(f, Pow):
            base, exp = f.base, f.exp
        else:
            base, exp = f, ONE
        if isinstance(base, Add) and isinstance(exp, Const) and exp.is_integer():
            c, base = _primitive(base)
            if c != (1, 0):
                coeff = _cmul(coeff, _cpowi(c, exp.re.numerator))
        if base in bases:
            bases[base] = add(bases[base], exp)
        else:
            bases[base] = exp
    if coeff == (0, 0):
        return ZERO
    out = []
    resplit = False
    for base, exp in bases.items():
        p = power(base, exp)
        if isinstance(p, Pow) and p.base == base:
            pass
        elif p == base and not (isinstance(p, Add) and _content(p) != (1, 0)):
            pass
        else:
            # the power collapsed (to a constant, a product, a new base, or a
            # sum needing sign extraction): collect again
            resplit = True
        out.append(p)
    if resplit:
        return mul(Const(*coeff), *out)
    out = [p for p in out if p != ONE]
    out.sort(key=_factor_key)
    if not out:
        return Const(*coeff)
    if len(out) == 1:
        only = out[0]
        if coeff == (1, 0):
            return only
        if isinstance(only, Add):
            return add(*(mul(Const(*coeff), t) for t in only.terms))
        return Mul((Const(*coeff), only))
    if coeff == (1, 0):
        return Mul(out)
    return Mul([Const(*coeff)] + out)


def power(base, exp):
    base, exp = as_expr(base), as_expr(exp)
    if isinstance(exp, Const):
        if exp == ZERO:
            return ONE
        if exp == ONE:
            return base
        if exp.is_integer():
            n = exp.re.numerator
            if isinstance(base, Const):
                if base == ZERO and n < 0:
                    return Pow(base, exp)
                if abs(n) <= MAX_FOLD_EXPONENT:
                    return Const(*_cpowi(base.value, n))
                return Pow(base, exp)
            if isinstance(base, Mul):
                return mul(*(power(f, exp) for f in base.factors))
            if isinstance(base, Pow):
                return power(base.base, mul(base.exp, exp))
            if isinstance(base, Add) and _content(base) != (1, 0):
                c, prim = _primitive(base)
                return mul(Const(*_cpowi(c, n)), power(prim, exp))
        elif isinstance(base, Const):
            if base == ONE:
                return ONE
            if base == ZERO and exp.re > 0:
                return ZERO
    if base == ONE:
        return ONE
    return Pow(base, exp)


def negate(e):
    if isinstance(e, Add):
        return _negate_sum(e)
    return mul(MINUS_ONE, e)


def _negate_sum(s):
    return add(*(mul(MINUS_ONE, t) for t in s.terms))


def _exact_sqrt(q):
    if q < 0:
        return None
    num, den = q.numerator, q.denominator
    rn, rd = _isqrt(num), _isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


def _isqrt(n):
    import math

    return math.isqrt(n)


def func(name, arg):
    if name == "conj":
        return conjugate_canonical(arg)
    if isinstance(arg, Const):
        if name == "sqrt" and arg.im == 0:
            r = _exact_sqrt(abs(arg.re))
            if r is not None:
                return Const(r) if arg.re >= 0 else Const(0, r)
        if arg == ZERO and name in ("sin", "sqrt"):
            return ZERO
        if arg == ZERO and name in ("cos", "exp"):
            return ONE
        if arg == ONE and name == "ln":
            return ZERO
    return Func(name, arg)


# ---------------------------------------------------------------------------
# tree transformations


def simplify(e):
    """Canonical form of ``e``; idempotent."""
    return _simplify(e)


@lru_cache(maxsize=200_000)
def _simplify(e):
    if isinstance(e, (Const, Param, Time, Coord)):
        return e
    if isinstance(e, ImagUnit):
        return I
    if isinstance(e, Add):
        return add(*(_simplify(t) for t in e.terms))
    if isinstance(e, Mul):
        return mul(*(_simplify(f) for f in e.factors))
    if isinstance(e, Pow):
        return power(_simplify(e.base), _simplify(e.exp))
    if isinstance(e, Div):
        return mul(_simplify(e.num), power(_simplify(e.den), MINUS_ONE))
    if isinstance(e, Neg):
        return negate(_simplify(e.arg))
    if isinstance(e, Func):
        return func(e.name, _simplify(e.arg))
    if isinstance(e, Conj):
        return conjugate_canonical(_simplify(e.arg))
    raise TypeError(f"not an expression: {e!r}")


def conjugate(e):
    """Formal complex conjugate: swaps barred/unbarred families, I -> -I.

    Parameters and t are real and stay fixed.  Functions conjugate their
    argument (``conj(sqrt(w)) = sqrt(conj(w))``), which is the principal-branch
    identity everywhere off the negative real axis.
    """
    return conjugate_canonical(simplify(e))


@lru_cache(maxsize=200_000)
def conjugate_canonical(e):
    if isinstance(e, Const):
        return Const(e.re, -e.im) if e.im else e
    if isinstance(e, (Param, Time)):
        return e
    if isinstance(e, Coord):
        return Coord(e.role.conjugate, e.index)
    if isinstance(e, Add):
        return add(*(conjugate_canonical(t) for t in e.terms))
    if isinstance(e, Mul):
        return mul(*(conjugate_canonical(f) for f in e.factors))
    if isinstance(e, Pow):
        return power(conjugate_canonical(e.base), conjugate_canonical(e.exp))
    if isinstance(e, Func):
        return func(e.name, conjugate_canonical(e.arg))
    return conjugate_canonical(simplify(e))


def map_symbols(e, fn):
    """Rebuild ``e`` (any tree) replacing each symbol ``s`` by ``fn(s)``; canonical result."""
    memo = {}

    def walk(node):
        if node in memo:
            return memo[node]
        if isinstance(node, SYMBOL_TYPES):
            out = fn(node)
            out = node if out is None else simplify(out)
        elif isinstance(node, (Const, ImagUnit)):
            out = simplify(node)
        elif isinstance(node, Add):
            out = add(*(walk(t) for t in node.terms))
        elif isinstance(node, Mul):
            out = mul(*(walk(f) for f in node.factors))
        elif isinstance(node, Pow):
            out = power(walk(node.base), walk(node.exp))
        elif isinstance(node, Func):
            out = func(node.name, walk(node.arg))
        elif isinstance(node, Div):
            out = mul(walk(node.num), power(walk(node.den), MINUS_ONE))
        elif isinstance(node, Neg):
            out = negate(walk(node.arg))
        elif isinstance(node, Conj):
            out = conjugate_canonical(walk(node.arg))
        else:
            raise TypeError(f"not an expression: {node!r}")
        memo[node] = out
        return out

    return walk(e)


def free_symbols(e):
    out = set()
    stack = [e]
    seen = set()
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, SYMBOL_TYPES):
            out.add(node)
        else:
            stack.extend(node.args)
    return frozenset(out)


def contains(e, predicate):
    return any(predicate(s) for s in free_symbols(e))


def _binding_key(k):
    if isinstance(k, str):
        k = symbol(k)
    if not isinstance(k, SYMBOL_TYPES):
        raise TypeError(f"binding keys must be symbols, got {k!r}")
    return k


def normalize_binding(binding):
    return {_binding_key(k): as_expr(v) for k, v in binding.items()}


def check_acyclic(binding):
    deps = {k: free_symbols(v) & binding.keys() for k, v in binding.items()}
    state = {}

    def visit(k, path):
        if state.get(k) == 2:
            return
        if state.get(k) == 1:
            raise CyclicBinding(f"cyclic binding through {' -> '.join(str(p) for p in path + [k])}")
        state[k] = 1
        for d in deps[k]:
            visit(d, path + [k])
        state[k] = 2

    for k in binding:
        visit(k, [])


def substitute(e, binding):
    """Simultaneously replace bound symbols; unbound symbols are untouched."""
    b = normalize_binding(binding)
    check_acyclic(b)
    return map_symbols(e, b.get)


def expand(e):
    """Distribute products over sums and multiply out small positive integer powers of sums."""
    return _expand(simplify(e))


@lru_cache(maxsize=50_000)
def _expand(e):
    if isinstance(e, Add):
        return add(*(_expand(t) for t in e.terms))
    if isinstance(e, Mul):
        result = [ONE]
        for f in e.factors:
            f = _expand(f)
            parts = f.terms if isinstance(f, Add) else (f,)
            result = [mul(r, p) for r in result for p in parts]
        return add(*result)
    if isinstance(e, Pow):
        base = _expand(e.base)
        exp = _expand(e.exp)
        if isinstance(base, Add) and isinstance(exp, Const) and exp.is_integer() and 1 < exp.re <= 8:
            return _expand(Mul([base] * int(exp.re)))
        return power(base, exp)
    if isinstance(e, Func):
        return func(e.name, _expand(e.arg))
    return e


def node_count(e):
    return 1 + sum(node_count(a) for a in e.args)
