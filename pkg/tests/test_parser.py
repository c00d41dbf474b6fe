import pytest

from complag.errors import IndexOutOfRange, MissingParameter, ParseError
from complag.expr import Add, Func, Mul, Pow, simplify
from complag.parser import format_document, format_system, parse_expr, parse_system, read_document
from complag.printer import print_expr
from complag.systems import load_builtin


def test_rational_literal_is_exact():
    e = parse_expr("1/2*m*zd1*zbd1")
    assert print_expr(simplify(e)) == "1/2*m*zd1*zbd1"


def test_precedence_golden():
    e = parse_expr("a+b*c^d")
    assert isinstance(e, Add)
    mul = e.terms[1]
    assert isinstance(mul, Mul) and isinstance(mul.factors[1], Pow)


def test_power_right_associative_and_unary_minus():
    assert simplify(parse_expr("2^3^2")) == simplify(parse_expr("2^9"))
    assert simplify(parse_expr("-2^2")) == simplify(parse_expr("-4"))


def test_sqrt_power():
    e = parse_expr("sqrt(z1*zb1)^alpha")
    assert isinstance(e, Pow) and isinstance(e.base, Func)


@pytest.mark.parametrize("text", ["z1 +", "2z1", "sqrt(z1", "z1 ** 2", ")", "", "foo(z1)", "z0", "z01"])
def test_syntax_errors_point_inside_input(text):
    with pytest.raises(ParseError) as info:
        parse_expr(text)
    assert 0 <= info.value.offset <= max(len(text.encode()) - 1, 0)
    assert info.value.expected or info.value.message


def test_error_reports_expected_tokens():
    with pytest.raises(ParseError) as info:
        parse_expr("z1 + * 2")
    assert info.value.offset == 5
    assert "number" in info.value.expected


@pytest.mark.parametrize("text, printed", [
    ("z1+zb1", "z1 + zb1"),
    ("zb1+z1", "z1 + zb1"),
    ("1/2*m*zbd1", "1/2*m*zbd1"),
    ("-(z1 - zb1)", "-z1 + zb1"),
    ("m/(z1*zb1)", "m/(z1*zb1)"),
    ("I*m*z1", "I*m*z1"),
])
def test_print(text, printed):
    assert print_expr(simplify(parse_expr(text))) == printed


def test_builtin_central_force():
    spec = load_builtin("central-force")
    assert spec.dof == 1
    assert set(spec.params) == {"m", "g", "A", "alpha"}


def test_builtin_hinged_rod():
    spec = load_builtin("hinged-rod")
    assert set(spec.params) == {"m", "g", "l", "theta"}
    loci = dict(spec.singular)
    assert loci["A"] == simplify(parse_expr("4*l^2-(z1+zb1)^2"))
    assert loci["sum"] == simplify(parse_expr("z1+zb1"))


def test_index_out_of_range():
    text = "[system]\nname = x\ndof = 1\n[lagrangian]\nL = z2*zb2\n"
    with pytest.raises(IndexOutOfRange):
        parse_system(text)


def test_missing_parameter():
    text = "[system]\nname = x\ndof = 1\n[params]\nm = 1\n[lagrangian]\nL = k*z1*zb1\n"
    with pytest.raises(MissingParameter):
        parse_system(text)


def test_system_syntax_error_has_line_and_offset():
    text = "[system]\nname = x\ndof = 1\n[lagrangian]\nL = z1 +* 2\n"
    with pytest.raises(ParseError) as info:
        parse_system(text)
    assert info.value.line == 5
    assert text.encode()[info.value.offset:info.value.offset + 1] == b"*"


def test_continuation_and_comments():
    text = "# c\n[system]\nname = x  # inline\ndof = 1\n[lagrangian]\nL = z1 \\\n  + zb1\n[singular]\nz1 + zb1\n"
    spec = parse_system(text)
    assert print_expr(spec.lagrangian) == "z1 + zb1"
    assert spec.singular[0][0] == "locus1"


@pytest.mark.parametrize("name", ["central-force", "hinged-rod", "harmonic-oscillator", "free-particle"])
def test_system_format_round_trip(name):
    spec = load_builtin(name)
    again = parse_system(format_system(spec))
    assert again.lagrangian == spec.lagrangian
    assert again.params == spec.params
    assert again.singular == spec.singular


def test_document_round_trip():
    doc = format_document([("a", [("x", "1"), ("H_zz[1,1]", "z1 + zb1")]), ("b:c", [("k", "v = w")])])
    assert read_document(doc) == {"a": {"x": "1", "H_zz[1,1]": "z1 + zb1"}, "b:c": {"k": "v = w"}}
