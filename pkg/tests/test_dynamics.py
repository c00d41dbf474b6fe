import math

import pytest

from complag import dynamics
from complag.dynamics import State, accelerations, integrate, rk4_step
from complag.errors import IntegrationAborted, SingularLocus, SingularMassMatrix, UnboundSymbol
from complag.lagrange import derive
from complag.parser import parse_system
from complag.systems import load_builtin


def test_oscillator_closed_form(oscillator, backend):
    traj = integrate(oscillator, "classical", State(0, [1], [0]), 10.0, 1e-3, backend)
    err = max(abs(z[0] - math.cos(t)) for t, z in zip(traj.times, traj.z))
    assert err < 1e-6
    assert traj.drift < 1e-10


def test_single_step(oscillator, backend):
    s = rk4_step(oscillator, "classical", State(0, [1], [0]), 1e-3, backend)
    assert abs(s.z[0] - math.cos(1e-3)) <= 1e-14
    assert abs(s.zdot[0] + math.sin(1e-3)) <= 1e-14


def test_step_halving(oscillator, backend):
    errs = []
    for dt in (4e-2, 2e-2, 1e-2):
        traj = integrate(oscillator, "classical", State(0, [1], [0]), 2.0, dt, backend)
        errs.append(abs(traj.z[-1][0] - math.cos(traj.times[-1])))
    for a, b in zip(errs, errs[1:]):
        assert 16 * 0.8 < a / b < 16 * 1.25


def test_free_particle_is_linear(free_particle, backend):
    zd = 1 + 0.5j
    traj = integrate(free_particle, "classical", State(0, [0], [zd]), 2.0, 0.01, backend)
    assert abs(traj.z[-1][0] - zd * traj.times[-1]) < 1e-12


def test_time_reversal(central_force, backend):
    s0 = State(0, [1.2], [0.3j])
    fwd = integrate(central_force, "classical", s0, 0.5, 1e-3, backend)
    back = State(0, fwd.z[-1], [-v for v in fwd.zdot[-1]])
    rev = integrate(central_force, "classical", back, 0.5, 1e-3, backend)
    assert abs(rev.z[-1][0] - 1.2) < 1e-9


def test_unpaired_channel_is_conjugate(central_force, backend):
    z0, zd0 = 1.2 + 0.1j, 0.3j
    paired = integrate(central_force, "classical", State(0, [z0], [zd0]), 0.3, 1e-3, backend)
    free = integrate(central_force, "classical",
                     State(0, [z0], [zd0], [z0.conjugate()], [zd0.conjugate()]), 0.3, 1e-3, backend)
    assert not free.paired
    assert abs(free.z[-1][0] - paired.z[-1][0]) < 1e-12
    assert abs(free.z[-1][1] - paired.z[-1][0].conjugate()) < 1e-12


def test_backsubstitution(hinged_rod, backend):
    traj = integrate(hinged_rod, "classical", State(0, [0.5 + 0.2j], [0.1 + 0.1j]), 0.2, 1e-3, backend)
    assert traj.backsub <= 1e-10
    values = dynamics.residual_series(derive(hinged_rod, "classical").flat(), hinged_rod, traj, backend)
    assert max(abs(v) for row in values for v in row) < 1e-9


def test_app2_accelerations(central_force, backend):
    a = accelerations(central_force.lagrangian, central_force, "classical", State(0, [1], [1j]), backend)
    assert abs(a[0] - (-2 - 9.8j)) < 1e-12


def test_singular_locus(hinged_rod, backend):
    with pytest.raises(SingularLocus) as info:
        accelerations(hinged_rod.lagrangian, hinged_rod, "classical", State(0, [1.0], [0]), backend)
    assert info.value.locus == "A"


def test_aborted_integration_keeps_trajectory(hinged_rod, backend):
    with pytest.raises(IntegrationAborted) as info:
        integrate(hinged_rod, "classical", State(0, [0.9999999999], [0]), 1.0, 1e-3, backend)
    exc = info.value
    assert isinstance(exc.cause, SingularLocus)
    assert exc.trajectory is not None and len(exc.trajectory) >= 1


def test_degenerate_mass_matrix(backend):
    spec = parse_system("[system]\nname = d\ndof = 1\n[lagrangian]\nL = (zd1 + zbd1)^2 - z1*zb1\n")
    with pytest.raises(SingularMassMatrix):
        accelerations(spec.lagrangian, spec, "classical", State(0, [0.3], [0.1]), backend)


def test_unbound_symbol_in_compile(oscillator):
    from complag.expr import symbol

    with pytest.raises(UnboundSymbol):
        dynamics.compile([symbol("k") * symbol("z1")], oscillator)


def test_paper_mode_is_not_an_ivp(oscillator):
    with pytest.raises(ValueError):
        integrate(oscillator, "paper", State(0, [1], [0]), 1.0, 0.1)


def test_csv_layout(oscillator):
    traj = integrate(oscillator, "classical", State(0, [1], [0]), 0.01, 1e-3)
    lines = traj.to_csv(trailer="# end").splitlines()
    assert lines[0] == "t,re_z1,im_z1,re_zd1,im_zd1,re_E,im_E,re_EL_paper,im_EL_paper"
    assert len(lines) == len(traj) + 2 and lines[-1] == "# end"


def test_state_validation():
    with pytest.raises(ValueError):
        State(0, [1, 2], [0])
    with pytest.raises(ValueError):
        State(0, [float("nan")], [0])


def test_app2_drift_before_locus(backend):
    # classical energy holds to 1e-8 while the orbit stays clear of z + zb = 0
    spec = load_builtin("central-force")
    traj = integrate(spec, "classical", State(0, [1.2], [0.3j]), 0.9, 1e-3, backend)
    assert traj.drift < 1e-8


def test_continued_gravity_conserves_energy(backend):
    # the transcribed gravity term is -m*g*y*sign(x); its x > 0 branch,
    # continued across x = 0, lets the orbit run the full interval
    spec = parse_system("[system]\nname = cf\ndof = 1\n[params]\nm = 1\ng = 9.8\nA = 2\nalpha = 3\n"
                        "[lagrangian]\nL = 1/2*m*zd1*zbd1 - A/alpha*sqrt(z1*zb1)^alpha + I/2*m*g*(z1 - zb1)\n"
                        "[singular]\nmodulus = z1*zb1\n")
    traj = integrate(spec, "classical", State(0, [1.2], [0.3j]), 5.0, 1e-3, backend)
    assert min(z[0].real for z in traj.z) < 0
    assert traj.drift < 1e-8
