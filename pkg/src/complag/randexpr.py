"""Seeded random expression trees for property tests and self-checks."""

import random
from fractions import Fraction

from .expr import Add, Conj, Const, Coord, Div, Func, ImagUnit, Mul, Neg, Param, Pow, Role, Time

DEFAULT_PARAMS = ("m", "g")
SMOOTH_FUNCS = ("sin", "cos", "exp")
ALL_FUNCS = ("sqrt", "sin", "cos", "exp", "ln")


def default_symbols(n=1, time=True):
    syms = []
    for i in range(1, n + 1):
        syms += [Coord(Role.Z, i), Coord(Role.ZBAR, i), Coord(Role.ZDOT, i), Coord(Role.ZBARDOT, i)]
    syms += [Param(p) for p in DEFAULT_PARAMS]
    if time:
        syms.append(Time())
    return syms


class ExprGenerator:
    """Random raw trees.

    ``smooth`` restricts to sums, products, non-negative integer powers and
    entire functions, so every generated expression is differentiable
    everywhere; otherwise quotients, negation, conjugation, branch functions
    and symbolic exponents appear too.
    """

    def __init__(self, seed=0, symbols=None, smooth=False, max_depth=4):
        self.rng = random.Random(seed)
        self.symbols = list(symbols) if symbols is not None else default_symbols()
        self.smooth = smooth
        self.max_depth = max_depth

    def const(self):
        rng = self.rng
        roll = rng.random()
        if roll < 0.1:
            return ImagUnit()
        num = rng.randint(-5, 5)
        den = rng.choice((1, 1, 1, 2, 3))
        if roll < 0.25:
            return Const(Fraction(num, den), Fraction(rng.randint(-3, 3), rng.choice((1, 2))))
        return Const(Fraction(num, den))

    def leaf(self):
        if self.rng.random() < 0.3:
            return self.const()
        return self.rng.choice(self.symbols)

    def __call__(self, depth=None):
        depth = self.max_depth if depth is None else depth
        rng = self.rng
        if depth <= 0 or rng.random() < 0.2:
            return self.leaf()
        kinds = ["add", "mul", "pow", "func"]
        if not self.smooth:
            kinds += ["div", "neg", "conj"]
        kind = rng.choice(kinds)
        sub = depth - 1
        if kind == "add":
            return Add(tuple(self(sub) for _ in range(rng.randint(2, 3))))
        if kind == "mul":
            return Mul(tuple(self(sub) for _ in range(rng.randint(2, 3))))
        if kind == "pow":
            base = self(sub)
            if self.smooth:
                return Pow(base, Const(rng.randint(0, 3)))
            roll = rng.random()
            if roll < 0.6:
                exp = Const(rng.randint(-3, 4))
            elif roll < 0.85:
                exp = Const(Fraction(rng.choice((-3, -1, 1, 3)), 2))
            else:
                exp = self(sub)
            return Pow(base, exp)
        if kind == "func":
            name = rng.choice(SMOOTH_FUNCS if self.smooth else ALL_FUNCS)
            return Func(name, self(min(sub, 2)))
        if kind == "div":
            return Div(self(sub), self(sub))
        if kind == "neg":
            return Neg(self(sub))
        return Conj(self(sub))

    def many(self, count, depth=None):
        return [self(depth) for _ in range(count)]


def random_expr(seed=0, depth=4, smooth=False, symbols=None):
    return ExprGenerator(seed, symbols, smooth, depth)()
