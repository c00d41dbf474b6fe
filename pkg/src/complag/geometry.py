"""Almost complex structure, Kaehler form of a Lagrangian, energies and one-forms.

Everything lives on the flat chart C^n x C^n with symbols (z, zb, zd, zbd).
Tangent vectors and one-forms are stored as 2n coefficient lists ordered
(d/dz^1..d/dz^n, d/dzb^1..d/dzb^n), respectively (dz^1..dz^n, dzb^1..dzb^n).

The Kaehler form Phi_L = -d d_J L is built mechanically: with
d_J L = c_a dq^a, c = (I*dL/dz^i, -I*dL/dzb^i), the 2-form has antisymmetric
coefficients Omega[b][a] = d_a c_b - d_b c_a, and the interior product is
(i_xi Phi)_a = sum_b xi^b Omega[b][a].  Velocities are held fixed by every
exterior derivative here, as in the usual hand expansion.
"""

from __future__ import annotations

from dataclasses import dataclass

from .calculus import partial
from .errors import DimensionMismatch
from .expr import ZERO, I, Coord, Role, add, as_expr, mul, simplify


def z(i):
    return Coord(Role.Z, i)


def zb(i):
    return Coord(Role.ZBAR, i)


def zd(i):
    return Coord(Role.ZDOT, i)


def zbd(i):
    return Coord(Role.ZBARDOT, i)


def chart_symbols(n):
    """(z^1..z^n, zb^1..zb^n), the position coordinates a 2-form is written in."""
    return [z(i) for i in range(1, n + 1)] + [zb(i) for i in range(1, n + 1)]


class TangentVector:
    __slots__ = ("coefficients",)

    def __init__(self, coefficients, n=None):
        coeffs = tuple(simplify(as_expr(c)) for c in coefficients)
        if len(coeffs) % 2:
            raise DimensionMismatch(f"a tangent vector needs 2n coefficients, got {len(coeffs)}")
        if n is not None and len(coeffs) != 2 * n:
            raise DimensionMismatch(f"expected {2 * n} coefficients, got {len(coeffs)}")
        self.coefficients = coeffs

    @property
    def n(self):
        return len(self.coefficients) // 2

    @property
    def unbarred(self):
        return self.coefficients[: self.n]

    @property
    def barred(self):
        return self.coefficients[self.n:]

    def __eq__(self, other):
        return isinstance(other, TangentVector) and self.coefficients == other.coefficients

    def __hash__(self):
        return hash(self.coefficients)

    def __neg__(self):
        return TangentVector([mul(-1, c) for c in self.coefficients])

    def __repr__(self):
        from .printer import print_expr

        return "TangentVector(" + ", ".join(print_expr(c) for c in self.coefficients) + ")"


def apply_J(v):
    n = v.n
    return TangentVector([mul(I, c) for c in v.coefficients[:n]] + [mul(-1, I, c) for c in v.coefficients[n:]])


def _check_square(g, size):
    if len(g) != size or any(len(row) != size for row in g):
        raise DimensionMismatch(f"metric must be {size}x{size}")


def _bilinear(g, x, y):
    return add(*(mul(x[a], g[a][b], y[b]) for a in range(len(x)) for b in range(len(y))))


def hermitian_residual(g, X, Y):
    """g(JX, Y) + g(X, JY); zero when g is compatible with J on (X, Y)."""
    if X.n != Y.n:
        raise DimensionMismatch("tangent vectors of different dimension")
    _check_square(g, 2 * X.n)
    g = [[as_expr(e) for e in row] for row in g]
    jx, jy = apply_J(X).coefficients, apply_J(Y).coefficients
    return simplify(add(_bilinear(g, jx, Y.coefficients), _bilinear(g, X.coefficients, jy)))


@dataclass
class KaehlerData:
    """Hessian blocks of L in (z, zb); H_ab[i][j] = d^2 L / d a^j d b^i."""

    n: int
    H_zz: list
    H_zbz: list
    H_zzb: list
    H_zbzb: list
    omega: list  # 2n x 2n antisymmetric coefficients of Phi_L
    energy: object = None
    dEL: list = None
    i_xi_PhiL: list = None

    def blocks(self):
        return [("H_zz", self.H_zz), ("H_zbz", self.H_zbz), ("H_zzb", self.H_zzb), ("H_zbzb", self.H_zbzb)]


def _hessian_block(L, outer, inner, n):
    # entry [i][j] = d/d outer^j (d/d inner^i L)
    first = [partial(L, inner(i)) for i in range(1, n + 1)]
    return [[partial(first[i], outer(j)) for j in range(1, n + 1)] for i in range(n)]


def dJ_coefficients(L, n):
    return [mul(I, partial(L, z(i))) for i in range(1, n + 1)] + [
        mul(-1, I, partial(L, zb(i))) for i in range(1, n + 1)
    ]


def kaehler_form(L, n):
    syms = chart_symbols(n)
    c = dJ_coefficients(L, n)
    size = 2 * n
    omega = [[ZERO] * size for _ in range(size)]
    for b in range(size):
        for a in range(b + 1, size):
            val = add(partial(c[b], syms[a]), mul(-1, partial(c[a], syms[b])))
            omega[b][a] = val
            omega[a][b] = simplify(mul(-1, val))
    return omega


def kaehler_coefficients(L, n):
    L = simplify(L)
    return KaehlerData(
        n=n,
        H_zz=_hessian_block(L, z, z, n),
        H_zbz=_hessian_block(L, zb, z, n),
        H_zzb=_hessian_block(L, z, zb, n),
        H_zbzb=_hessian_block(L, zb, zb, n),
        omega=kaehler_form(L, n),
    )


def semispray(spec):
    n = spec.dof
    return TangentVector([zd(i) for i in range(1, n + 1)] + [zbd(i) for i in range(1, n + 1)])


def liouville(spec):
    return apply_J(semispray(spec))


def directional_derivative(v, L):
    """v(L) for a tangent vector on the position chart."""
    syms = chart_symbols(v.n)
    return simplify(add(*(mul(c, partial(L, s)) for c, s in zip(v.coefficients, syms))))


def paper_energy(L, spec):
    n = spec.dof
    terms = []
    for i in range(1, n + 1):
        terms.append(mul(I, zd(i), partial(L, z(i))))
        terms.append(mul(-1, I, zbd(i), partial(L, zb(i))))
    terms.append(mul(-1, L))
    return simplify(add(*terms))


def classical_energy(L, spec):
    n = spec.dof
    terms = [mul(zd(i), partial(L, zd(i))) for i in range(1, n + 1)]
    terms += [mul(zbd(i), partial(L, zbd(i))) for i in range(1, n + 1)]
    terms.append(mul(-1, L))
    return simplify(add(*terms))


def energy_differential(E, spec):
    """Coefficients (dE/dz^j, dE/dzb^j) with velocities held fixed."""
    return [partial(E, s) for s in chart_symbols(spec.dof)]


def interior_product(K, xi):
    if xi.n != K.n:
        raise DimensionMismatch(f"vector has n={xi.n}, Kaehler data has n={K.n}")
    size = 2 * K.n
    x = xi.coefficients
    return [simplify(add(*(mul(x[b], K.omega[b][a]) for b in range(size)))) for a in range(size)]


def one_form_on(form, v):
    """Evaluate a one-form (coefficient list) on a tangent vector."""
    if len(form) != len(v.coefficients):
        raise DimensionMismatch("one-form and vector differ in dimension")
    return simplify(add(*(mul(f, c) for f, c in zip(form, v.coefficients))))


def dynamics_residual(L, spec):
    """i_xi Phi_L - dE_L componentwise, xi the semispray."""
    L = simplify(L)
    K = kaehler_coefficients(L, spec.dof)
    xi = semispray(spec)
    ip = interior_product(K, xi)
    dE = energy_differential(paper_energy(L, spec), spec)
    return [simplify(add(a, mul(-1, b))) for a, b in zip(ip, dE)]


def full_kaehler_data(L, spec):
    L = simplify(L)
    K = kaehler_coefficients(L, spec.dof)
    K.energy = paper_energy(L, spec)
    K.dEL = energy_differential(K.energy, spec)
    K.i_xi_PhiL = interior_product(K, semispray(spec))
    return K


# ---------------------------------------------------------------------------
# literal readings of the hand-expanded displays (informational only)
#
# Each display term is (sign, xi kind, outer var, inner var, delta, form kind,
# form index) where the Hessian entry is d^2 L / d outer d inner, kinds are
# "z" or "zb", and index labels are "i" or "j".  Repeated labels are summed
# over 1..n; delta restricts to i == j.  The form index picks which basis
# one-form the term lands on.

_IP_DISPLAY = [
    (+1, "z", ("z", "j"), ("z", "i"), False, "z", "j"),
    (-1, "z", ("z", "j"), ("z", "i"), True, "z", "i"),
    (+1, "z", ("zb", "j"), ("z", "i"), False, "zb", "j"),
    (-1, "zb", ("zb", "j"), ("z", "i"), True, "z", "i"),
    (+1, "z", ("z", "j"), ("zb", "i"), False, "zb", "i"),
    (-1, "zb", ("z", "j"), ("zb", "i"), True, "z", "j"),
    (+1, "zb", ("zb", "j"), ("zb", "i"), True, "zb", "i"),
    (-1, "zb", ("zb", "j"), ("zb", "i"), False, "zb", "j"),
]

_DE_DISPLAY = [
    (+1, "z", ("z", "j"), ("z", "i"), False, "z", "j"),
    (-1, "zb", ("z", "j"), ("zb", "i"), False, "z", "j"),
    (+1, "z", ("zb", "j"), ("z", "i"), False, "zb", "j"),
    (-1, "zb", ("zb", "j"), ("zb", "i"), False, "zb", "j"),
]

_VAR = {"z": z, "zb": zb, "zd": zd}


def _expand_display(L, n, terms, xi_index_from_form=False):
    out = [[] for _ in range(2 * n)]
    rng = range(1, n + 1)
    for sign, xkind, (ok, ol), (ik, il), delta, fkind, flabel in terms:
        for i in rng:
            for j in rng:
                if delta and i != j:
                    continue
                idx = {"i": i, "j": j}
                xi = zd(i) if xkind == "z" else zbd(i)
                h = partial(partial(L, _VAR[ik](idx[il])), _VAR[ok](idx[ol]))
                slot = idx[flabel] - 1 + (n if fkind == "zb" else 0)
                out[slot].append(mul(sign, I, xi, h))
    return out


def interior_product_display(L, spec):
    """The printed term-by-term contraction, read literally."""
    n = spec.dof
    L = simplify(L)
    return [simplify(add(*ts)) for ts in _expand_display(L, n, _IP_DISPLAY)]


def energy_differential_display(L, spec):
    n = spec.dof
    L = simplify(L)
    parts = _expand_display(L, n, _DE_DISPLAY)
    for k, s in enumerate(chart_symbols(n)):
        parts[k].append(mul(-1, partial(L, s)))
    return [simplify(add(*ts)) for ts in parts]


def residual_display(L, spec):
    """The printed combination that should vanish on integral curves, read literally.

    dz^j slot:  -I*[xi^j L_{z^j z^i} + xib^i L_{zb^j z^i}] + L_{z^j}
    dzb^j slot:  I*[xi^j L_{z^j zd^j} + xib^i L_{zb^j zd^j}] + L_{zd^j}
    with i summed only in terms that carry it.
    """
    n = spec.dof
    L = simplify(L)
    out = []
    for j in range(1, n + 1):
        inner = [mul(zd(j), partial(partial(L, z(i)), z(j))) for i in range(1, n + 1)]
        inner += [mul(zbd(i), partial(partial(L, z(i)), zb(j))) for i in range(1, n + 1)]
        out.append(simplify(add(mul(-1, I, add(*inner)), partial(L, z(j)))))
    for j in range(1, n + 1):
        dzd = partial(L, zd(j))
        inner = [mul(zd(j), partial(dzd, z(j)))]
        inner += [mul(zbd(i), partial(dzd, zb(j))) for i in range(1, n + 1)]
        out.append(simplify(add(mul(I, add(*inner)), dzd)))
    return out


def closedness_coefficients(K):
    """Coefficients of d(Phi_L) on dq^a ^ dq^b ^ dq^c, a < b < c; all vanish."""
    n = K.n
    syms = chart_symbols(n)
    om = K.omega
    out = []
    size = 2 * n
    for a in range(size):
        for b in range(a + 1, size):
            for c in range(b + 1, size):
                out.append(((a, b, c), add(partial(om[b][c], syms[a]), partial(om[c][a], syms[b]),
                                           partial(om[a][b], syms[c]))))
    return out


def third_partial_pairs(L, n):
    """Pairs (d_a d_b d_c L, d_c d_b d_a L) over the position chart, for commutation checks."""
    syms = chart_symbols(n)
    pairs = []
    for a in syms:
        for b in syms:
            for c in syms:
                if a.key() <= c.key():
                    pairs.append(((a, b, c), partial(partial(partial(L, a), b), c),
                                  partial(partial(partial(L, c), b), a)))
    return pairs
