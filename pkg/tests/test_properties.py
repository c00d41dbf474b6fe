"""Randomized invariants over generated expression trees."""

import cmath
import random

import pytest
from hypothesis import given, settings
from hypothesis.strategies import complex_numbers, integers

from complag import partial, time_derivative
from complag.calculus import wirtinger_fd_check
from complag.errors import ComplagError
from complag.expr import Const, Div, Func, Pow, add, conjugate, free_symbols, mul, simplify
from complag.numeric import SamplingDomain, equal_numeric, evaluate
from complag.parser import parse_expr
from complag.printer import print_expr
from complag.randexpr import ExprGenerator, default_symbols

TREES = 1000


def trees(seed, count=TREES, **kw):
    return ExprGenerator(seed, **kw).many(count)


def test_round_trip():
    for raw in trees(100):
        e = simplify(raw)
        assert simplify(parse_expr(print_expr(e))) == e, print_expr(e)


def test_conjugation_involution():
    for raw in trees(101):
        e = simplify(raw)
        assert conjugate(conjugate(e)) == e


def test_simplify_idempotent():
    for raw in trees(102):
        e = simplify(raw)
        assert simplify(e) == e


def _children(e):
    for name in ("terms", "factors"):
        if hasattr(e, name):
            return getattr(e, name)
    if isinstance(e, Pow):
        return (e.base, e.exp)
    if isinstance(e, Div):
        return (e.num, e.den)
    return (e.arg,) if hasattr(e, "arg") else ()


def _branch_args(e):
    """Arguments of sqrt, ln and non-integer powers, where the cut matters."""
    out = []
    if isinstance(e, Func) and e.name in ("sqrt", "ln"):
        out.append(e.arg)
    if isinstance(e, Pow) and not (isinstance(e.exp, Const) and e.exp.im == 0 and e.exp.re.denominator == 1):
        out.append(e.base)
    for c in _children(e):
        out += _branch_args(c)
    return out


def _near_cut(w):
    return w.real <= 0 and abs(w.imag) <= 1e-9 * (1 + abs(w))


def test_simplify_preserves_value_off_cuts():
    # conj(f(w)) = f(conj(w)) and the other rewrites hold except on a cut
    rng = random.Random(9)
    domain = SamplingDomain()
    compared = 0
    for raw in trees(103, 300):
        e = simplify(raw)
        cuts = _branch_args(raw)
        syms = free_symbols(e).union(*(free_symbols(simplify(c)) for c in cuts))
        for _ in range(10):
            point = domain.sample(syms, rng)
            try:
                if any(_near_cut(evaluate(c, point)) for c in cuts):
                    continue
                a, b = evaluate(raw, point), evaluate(e, point)
            except (ComplagError, OverflowError):
                continue
            if not (cmath.isfinite(a) and cmath.isfinite(b)):
                continue
            assert abs(a - b) <= 1e-9 * max(1.0, abs(a), abs(b)), print_expr(e)
            compared += 1
    assert compared > 1500


def test_partials_sound_against_fd():
    gen = ExprGenerator(104, default_symbols(1, time=False), smooth=True, max_depth=3)
    rng = random.Random(5)
    for _ in range(200):
        e = simplify(gen())
        for _ in range(20):
            z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
            zd = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
            point = {"z1": z, "zd1": zd, "m": rng.uniform(0.5, 2), "g": rng.uniform(0.5, 2)}
            full = dict(point, zb1=z.conjugate(), zbd1=zd.conjugate())
            # central-difference roundoff grows like eps*|f|/step
            noise = 1e-15 * abs(evaluate(e, full)) / 1e-5
            reports = [wirtinger_fd_check(e, v, point) for v in ("z1", "zb1")]
            # d/dz and d/dzb mix the same real partials, so share their scale
            scale = 1 + sum(abs(r.symbolic) for r in reports)
            for r in reports:
                assert r.deviation <= 1e-6 * scale + noise, print_expr(e)


def test_schwarz_on_random_expressions():
    gen = ExprGenerator(105, default_symbols(1), smooth=True, max_depth=3)
    for _ in range(200):
        e = simplify(gen())
        assert partial(partial(e, "z1"), "zb1") == partial(partial(e, "zb1"), "z1")


def test_partial_is_linear():
    gen = ExprGenerator(106, default_symbols(1), smooth=True, max_depth=3)
    for _ in range(200):
        a, b, c = simplify(gen()), simplify(gen()), simplify(gen(0))
        lhs = partial(add(a, mul(c, b)), "z1") if "z" not in print_expr(c) else None
        if lhs is None:
            continue
        rhs = add(partial(a, "z1"), mul(c, partial(b, "z1")))
        assert lhs == rhs or equal_numeric(lhs, rhs, 10, 1e-10).equal


def test_time_derivative_commutes_with_conjugate():
    gen = ExprGenerator(107, default_symbols(1), smooth=True, max_depth=3)
    for _ in range(200):
        e = simplify(gen())
        assert conjugate(time_derivative(e)) == time_derivative(conjugate(e))


@given(integers(min_value=0, max_value=10**6))
@settings(max_examples=200, deadline=None)
def test_round_trip_any_seed(seed):
    e = simplify(ExprGenerator(seed, max_depth=3)())
    assert simplify(parse_expr(print_expr(e))) == e


@given(complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False))
def test_conjugate_evaluates_to_conjugate(z):
    e = simplify(parse_expr("z1^2*zb1 + I*z1"))
    point = {"z1": z, "zb1": z.conjugate()}
    assert evaluate(conjugate(e), point) == pytest.approx(evaluate(e, point).conjugate(), rel=1e-12, abs=1e-9)
