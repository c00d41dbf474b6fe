import cmath
from fractions import Fraction

import pytest

from complag.errors import CyclicBinding, DivisionByZero, DomainError, UnboundSymbol
from complag.expr import (
    I,
    Add,
    Const,
    Coord,
    Mul,
    Param,
    Role,
    Time,
    conjugate,
    free_symbols,
    simplify,
    substitute,
    symbol,
)
from complag.numeric import SamplingDomain, equal_numeric, evaluate
from complag.parser import parse_expr


def P(text):
    return simplify(parse_expr(text))


def test_i_squared():
    assert simplify(I * I) == Const(-1)


def test_like_terms_collect():
    assert P("z1 + z1") == P("2*z1")
    assert P("z1 + z1") == Mul((Const(2), symbol("z1")))


def test_constants_are_exact():
    e = P("1/2*m*zd1*zbd1")
    c = e.factors[0]
    assert (c.re, c.im) == (Fraction(1, 2), 0)


def test_trees_are_immutable():
    e = P("z1 + zb1")
    with pytest.raises(AttributeError):
        e.terms = ()


def test_simplify_preserves_value_sqrt():
    raw = parse_expr("(z1*zb1)^(1/2)")
    assert evaluate(raw, {"z1": 3 + 4j, "zb1": 3 - 4j}) == pytest.approx(5)
    rep = equal_numeric(raw, simplify(raw), trials=50, tol=1e-12)
    assert rep.equal


def test_simplify_idempotent_on_sample():
    e = P("(z1 + 2)^2*(z1 + 2)^-1 - sqrt(4)*z1")
    assert simplify(e) == e
    assert e == Const(2) - symbol("z1") or equal_numeric(e, P("2 - z1")).equal


def test_sum_inside_product_is_primitive():
    # the grouping of a product must not matter
    assert P("(1/2*(z1 + 3*zb1))*m") == P("1/2*((z1 + 3*zb1)*m)")
    assert P("(2*z1 - 2*zb1)^2") == P("4*(z1 - zb1)^2")
    assert P("(I*z1 + I*zb1)*m") == P("I*m*(z1 + zb1)")


@pytest.mark.parametrize("text, binding, expected", [
    ("z1^2", {"z1": 2}, "4"),
    ("zd1", {"zd1": "zdd1*t"}, "zdd1*t"),
    ("z1 + zb1", {"z1": "x1"}, "x1 + zb1"),
])
def test_substitute(text, binding, expected):
    b = {k: (parse_expr(v) if isinstance(v, str) else v) for k, v in binding.items()}
    assert substitute(P(text), b) == P(expected)


def test_substitute_cyclic():
    with pytest.raises(CyclicBinding):
        substitute(P("z1"), {"z1": parse_expr("z1 + 1")})


def test_substitution_commutes_with_evaluation(central_force):
    L = central_force.lagrangian
    values = {"m": 1, "A": 2, "alpha": 3, "g": Fraction(49, 5)}
    bound = substitute(L, values)
    point = {"z1": 1.1 + 0.2j, "zb1": 1.1 - 0.2j, "zd1": 0.3 - 0.1j, "zbd1": 0.3 + 0.1j}
    direct = evaluate(L, dict(point, m=1, A=2, alpha=3, g=9.8))
    assert evaluate(bound, point) == pytest.approx(direct, rel=1e-14)


def test_conjugate_roles_and_unit():
    assert conjugate(symbol("z1")) == symbol("zb1")
    assert conjugate(symbol("zdd2")) == symbol("zbdd2")
    assert conjugate(P("I*(z1 - zb1)")) == P("I*(z1 - zb1)")
    assert conjugate(P("m*t")) == P("m*t")


def test_conjugate_of_app2_lagrangian_is_real(central_force):
    L = central_force.lagrangian
    assert conjugate(L) == L
    for k in range(20):
        z = complex(0.6 + 0.07 * k, 0.3 - 0.03 * k)
        zd = complex(0.2 * k - 1, 0.5)
        v = evaluate(L, {"z1": z, "zb1": z.conjugate(), "zd1": zd, "zbd1": zd.conjugate(),
                         "m": 1, "g": 9.8, "A": 2, "alpha": 3})
        assert abs(v.imag) <= 1e-12 * (1 + abs(v))


def test_eval_examples():
    assert evaluate(P("I^2"), {}) == -1
    assert evaluate(P("1/2*m*zbd1"), {"m": 1, "zbd1": 2 - 2j}) == 1 - 1j
    A = P("4*l^2 - (z1 + zb1)^2")
    assert evaluate(A, {"l": 1, "z1": 0.1 + 0.3j, "zb1": 0.1 - 0.3j}) == pytest.approx(3.96, abs=1e-15)


def test_eval_principal_branch():
    assert evaluate(P("sqrt(-4)"), {}) == 2j
    assert evaluate(parse_expr("sqrt(z1)"), {"z1": -4}) == cmath.sqrt(-4)
    assert evaluate(parse_expr("ln(z1)"), {"z1": -1}) == pytest.approx(1j * cmath.pi)


def test_eval_errors():
    with pytest.raises(UnboundSymbol):
        evaluate(P("z1 + m"), {"z1": 1})
    with pytest.raises(DivisionByZero):
        evaluate(parse_expr("1/z1"), {"z1": 0})
    with pytest.raises(DomainError):
        evaluate(parse_expr("ln(z1)"), {"z1": 0})


def test_equal_numeric_examples():
    assert equal_numeric(P("z1 + z1"), P("2*z1"), 100, 1e-12).equal
    right_half = SamplingDomain(boxes={"z1": ((0.1, 2.0), (-2.0, 2.0))}, conj_pairs=False)
    assert equal_numeric(parse_expr("sqrt(z1)^2"), P("z1"), 100, 1e-12, domain=right_half).equal
    rep = equal_numeric(P("z1"), P("zb1"), 50, 1e-12)
    assert not rep.equal and rep.argmax is not None


def test_equal_numeric_is_seeded():
    a = equal_numeric(P("z1*zb1"), P("z1^2"), 30, 1e-12, seed=3)
    b = equal_numeric(P("z1*zb1"), P("z1^2"), 30, 1e-12, seed=3)
    assert a == b


def test_canonical_order():
    e = P("zb1 + t + z1 + m + 2 + I")
    kinds = [type(t).__name__ for t in e.terms]
    assert kinds == ["Const", "Param", "Time", "Coord", "Coord"]
    assert e.terms[3] == symbol("z1")


def test_free_symbols():
    assert free_symbols(P("m*z1 + t")) == {Param("m"), Coord(Role.Z, 1), Time()}


def test_add_is_flat():
    e = P("(z1 + zb1) + (zd1 + zbd1)")
    assert isinstance(e, Add) and len(e.terms) == 4
