import pytest

from complag import lagrange
from complag.errors import OrderOverflow
from complag.expr import ZERO, simplify
from complag.parser import parse_expr, parse_system
from complag.printer import print_expr


def P(text):
    return simplify(parse_expr(text))


def test_paper_mode_golden(central_force):
    el = lagrange.derive(central_force, "paper")
    named = dict(el.named())
    assert print_expr(named["R2_1"]) == "I*(1/2*m*zbdd1) + 1/2*m*zbd1"


def test_free_particle_has_trivial_r1(free_particle):
    el = lagrange.derive(free_particle, "paper")
    assert el.residuals[0][0] == ZERO


def test_classical_oscillator(oscillator):
    el = lagrange.derive(oscillator, "classical")
    r1, r2 = el.residuals[0]
    assert r1 == P("zbdd1 + zb1")
    assert r2 == P("zdd1 + z1")
    assert lagrange.conjugate_closure_holds(el)


@pytest.mark.parametrize("mode", lagrange.MODES)
def test_affine_in_accelerations(hinged_rod, mode):
    el = lagrange.derive(hinged_rod, mode)
    assert all(lagrange.residual_is_affine_in_accelerations(r, 1) for r in el.flat())


def test_unknown_mode(oscillator):
    with pytest.raises(ValueError):
        lagrange.derive(oscillator, "hamiltonian")


def test_acceleration_in_lagrangian_overflows():
    spec = parse_system("[system]\nname = x\ndof = 1\n[lagrangian]\nL = zdd1*zbd1\n")
    with pytest.raises(OrderOverflow):
        lagrange.derive(spec, "classical")


def test_app2_momentum_structural(central_force):
    from complag import partial

    assert partial(central_force.lagrangian, "zd1") == P("1/2*m*zbd1")


def test_app2_reconciliation_matches():
    s, u = lagrange.reconcile_application("central-force", seed=0)
    assert s.verdict == "match" and s.max_deviation <= 1e-9
    assert u.verdict == "match" and u.max_deviation <= 1e-12
    assert "j read as -I" in s.notes[0]


def test_app2_other_j_reading_diverges():
    s, _ = lagrange.reconcile_application("central-force", seed=0, j_sign=1)
    assert s.verdict == "divergence"


def test_app1_reports_divergence_with_argmax():
    q, w = lagrange.reconcile_application("hinged-rod", seed=0)
    for r in (q, w):
        assert r.verdict in ("match", "divergence")
        if r.verdict == "divergence":
            assert r.argmax and r.max_deviation > r.tol and r.terms


def test_reconcile_is_deterministic():
    a = lagrange.reconcile_application("hinged-rod", seed=7)
    b = lagrange.reconcile_application("hinged-rod", seed=7)
    assert [r.items() for r in a] == [r.items() for r in b]
