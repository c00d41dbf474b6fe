"""Infix pretty-printer producing text that ``parse_expr`` reads back.

Parentheses appear only where precedence demands them.  Products print as
``coefficient*numerator/denominator``; a purely imaginary coefficient prints
as ``I*(...)`` around the real-coefficient product, which keeps derived
equations close to how they are usually written by hand.
"""

from fractions import Fraction

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
    Time,
    _negative,
    negate,
    power,
)

ADD, MUL, NEG, POW, ATOM = 1, 2, 3, 4, 5


def print_expr(e):
    return _fmt(e)[0]


def _rational(q):
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _const(c):
    re, im = c.re, c.im
    if im == 0:
        if re < 0:
            return "-" + _rational(-re), NEG
        return _rational(re), ATOM if re.denominator == 1 else MUL
    if re == 0:
        mag = abs(im)
        text = "I" if mag == 1 else f"{_rational(mag)}*I"
        if im < 0:
            return "-" + text, NEG
        return text, ATOM if mag == 1 else MUL
    sign = "-" if im < 0 else "+"
    mag = abs(im)
    imag = "I" if mag == 1 else f"{_rational(mag)}*I"
    return f"{_const(Const(re))[0]} {sign} {imag}", ADD


def _paren(text, prec, need):
    return f"({text})" if prec < need else text


def _exp_negative(exp):
    if isinstance(exp, Const):
        return _negative(exp.value)
    if isinstance(exp, Mul) and isinstance(exp.factors[0], Const):
        return _negative(exp.factors[0].value)
    return False


def _fmt(e):
    if isinstance(e, Const):
        return _const(e)
    if isinstance(e, ImagUnit):
        return "I", ATOM
    if isinstance(e, (Param, Coord)):
        return e.name, ATOM
    if isinstance(e, Time):
        return "t", ATOM
    if isinstance(e, Func):
        return f"{e.name}({_fmt(e.arg)[0]})", ATOM
    if isinstance(e, Conj):
        return f"conj({_fmt(e.arg)[0]})", ATOM
    if isinstance(e, Add):
        return _fmt_sum(e.terms)
    if isinstance(e, Mul):
        return _fmt_product(e.factors)
    if isinstance(e, Pow):
        if _exp_negative(e.exp) and not isinstance(e.base, Const):
            return _fmt_product((e,))
        return _fmt_power(e.base, e.exp)
    if isinstance(e, Div):
        num, p = _fmt(e.num)
        den, q = _fmt(e.den)
        return f"{_paren(num, p, MUL)}/{_paren(den, q, POW)}", MUL
    if isinstance(e, Neg):
        text, p = _fmt(e.arg)
        return "-" + _paren(text, p, POW), NEG
    raise TypeError(f"not an expression: {e!r}")


def _fmt_power(base, exp):
    b, bp = _fmt(base)
    x, xp = _fmt(exp)
    return f"{_paren(b, bp, ATOM)}^{_paren(x, xp, ATOM)}", POW


def _split_sign(term):
    """Return (negative?, term with the sign removed)."""
    if isinstance(term, Neg):
        return True, term.arg
    if isinstance(term, Const) and _negative(term.value):
        return True, Const(-term.re, -term.im)
    if isinstance(term, Mul) and isinstance(term.factors[0], Const) and _negative(term.factors[0].value):
        c = term.factors[0]
        rest = term.factors[1:]
        if c.value == (-1, 0):
            return True, rest[0] if len(rest) == 1 else Mul(rest)
        return True, Mul((Const(-c.re, -c.im),) + rest)
    return False, term


def _fmt_sum(terms):
    pieces = []
    for k, term in enumerate(terms):
        neg, pos = _split_sign(term)
        text, p = _fmt(pos)
        if k == 0:
            pieces.append(("-" + _paren(text, p, MUL)) if neg else text)
        else:
            pieces.append((" - " if neg else " + ") + _paren(text, p, MUL if neg else ADD + 1))
    return "".join(pieces), ADD


def _fmt_product(factors):
    coeff = None
    rest = list(factors)
    if rest and isinstance(rest[0], Const):
        coeff = rest.pop(0)
    if any(isinstance(f, Const) for f in rest):
        # non-canonical product: print factor by factor
        parts = [_paren(*_fmt(f), POW if isinstance(f, Const) else MUL + 1) for f in factors]
        return "*".join(parts), MUL
    num, den = [], []
    for f in rest:
        if isinstance(f, Pow) and _exp_negative(f.exp) and not isinstance(f.base, Const):
            den.append(power(f.base, negate(f.exp)))
        else:
            num.append(f)
    if coeff is None or coeff.value == (1, 0):
        return _real_product(Fraction(1), num, den)
    re, im = coeff.re, coeff.im
    if im == 0:
        if re < 0:
            text, _ = _real_product(-re, num, den)
            return "-" + text, NEG
        return _real_product(re, num, den)
    if re == 0:
        sign = "-" if im < 0 else ""
        mag = abs(im)
        if not num and not den:
            return _const(coeff)
        if mag == 1:
            if not num:
                return f"{sign}I/{_den_text(den)}", NEG if sign else MUL
            return f"{sign}I*{_real_product(Fraction(1), num, den)[0]}", NEG if sign else MUL
        inner = _real_product(mag, num, den)[0]
        return f"{sign}I*({inner})", NEG if sign else MUL
    text, _ = _real_product(Fraction(1), num, den)
    lead = f"({_const(coeff)[0]})"
    if not num and not den:
        return _const(coeff)
    if not num:
        return f"{lead}/{_den_text(den)}", MUL
    return f"{lead}*{text}", MUL


def _den_text(den):
    if len(den) == 1:
        text, p = _fmt(den[0])
        return _paren(text, p, POW)
    return "(" + "*".join(_paren(*_fmt(f), MUL + 1) for f in den) + ")"


def _real_product(c, num, den):
    parts = []
    if c != 1 or not num:
        parts.append(_rational(c))
    parts.extend(_paren(*_fmt(f), MUL + 1) for f in num)
    text = "*".join(parts)
    if den:
        text = f"{text}/{_den_text(den)}"
    return text, MUL
