import subprocess
import sys

import pytest

from complag import calculus, cli
from complag.expr import mul
from complag.parser import read_document


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_derive_golden(capsys):
    code, out, _ = run(["derive", "--system", "central-force", "--mode", "paper"], capsys)
    assert code == 0
    doc = read_document(out)
    assert doc["equations"]["R2_1"] == "I*(1/2*m*zbdd1) + 1/2*m*zbd1"
    assert set(doc) == {"system", "equations", "hessian", "one-forms"}


def test_derive_free_particle(capsys):
    code, out, _ = run(["derive", "--system", "free-particle"], capsys)
    assert code == 0 and "R1_1 = 0\n" in out


def test_derive_round_trips_through_parser(capsys, central_force):
    from complag.numeric import equal_numeric
    from complag.parser import parse_expr
    from complag import lagrange

    _, out, _ = run(["derive", "--system", "central-force", "--mode", "classical"], capsys)
    eqs = read_document(out)["equations"]
    el = dict(lagrange.derive(central_force, "classical").named())
    dom = lagrange.default_domain(central_force)
    for name, expr in el.items():
        assert equal_numeric(parse_expr(eqs[name]), expr, 50, 1e-12, domain=dom).equal


@pytest.mark.parametrize("argv", [
    ["derive", "--system", "central-force", "--seed", "3"],
    ["reconcile", "--system", "hinged-rod", "--seed", "7"],
    ["simulate", "--system", "harmonic-oscillator", "--t-end", "0.5"],
    ["verify", "--system", "harmonic-oscillator", "--seed", "2", "--t-end", "0.1"],
])
def test_deterministic(argv, capsys):
    a = run(argv, capsys)
    b = run(argv, capsys)
    assert a[0] == b[0] == 0
    assert a[1] == b[1]


def test_simulate_paper_mode_refused(capsys):
    code, out, err = run(["simulate", "--system", "central-force", "--mode", "paper"], capsys)
    assert code == 4 and out == "" and "classical" in err


def test_simulate_abort_names_locus(capsys):
    argv = ["simulate", "--system", "hinged-rod", "--z0", "0.9999999999,0", "--zd0", "0,0", "--t-end", "1"]
    code, out, err = run(argv, capsys)
    assert code == 5
    assert "locus A" in err
    assert out.splitlines()[-1].startswith("# aborted at t=")


def test_simulate_csv(capsys, tmp_path):
    target = tmp_path / "osc.csv"
    code, out, err = run(["simulate", "--system", "harmonic-oscillator", "--t-end", "1", "--out", str(target)], capsys)
    assert code == 0 and out == "" and "drift=" in err
    rows = target.read_text().splitlines()
    assert len(rows) == 1002


@pytest.mark.parametrize("argv", [
    ["simulate", "--system", "harmonic-oscillator", "--dt", "-1"],
    ["simulate", "--system", "harmonic-oscillator", "--z0", "1"],
    ["derive", "--system", "no-such-system"],
    ["reconcile", "--system", "harmonic-oscillator"],
    ["derive"],
])
def test_usage_errors(argv, capsys):
    try:
        code = cli.main(argv)
    except SystemExit as exc:
        code = exc.code
    capsys.readouterr()
    assert code == 2


def test_parse_error_in_file(tmp_path, capsys):
    bad = tmp_path / "bad.sys"
    bad.write_text("[system]\nname = b\ndof = 1\n[lagrangian]\nL = z1 +\n")
    code, _, err = run(["derive", "--system", str(bad)], capsys)
    assert code == 2 and "bad.sys" in err


def test_verify_passes(capsys):
    code, out, _ = run(["verify", "--system", "central-force", "--t-end", "0.2"], capsys)
    assert code == 0
    doc = read_document(out)
    assert doc["verify"]["must_pass_failed"] == "0"
    assert doc["check:energy_diagnostics"]["class"] == "informational"


def test_verify_catches_broken_derivatives(monkeypatch, capsys):
    good = calculus.partial
    monkeypatch.setattr(calculus, "partial", lambda e, v: mul(2, good(e, v)))
    code, out, err = run(["verify", "--system", "harmonic-oscillator", "--t-end", "0.05"], capsys)
    assert code == 3
    assert "fd_derivatives" in err
    assert read_document(out)["check:fd_derivatives"]["status"] == "fail"


def test_examples_emit(tmp_path, capsys):
    code, _, _ = run(["examples", "--emit", str(tmp_path)], capsys)
    assert code == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["central-force.sys", "free-particle.sys", "harmonic-oscillator.sys", "hinged-rod.sys"]
    code, _, _ = run(["derive", "--system", str(tmp_path / "hinged-rod.sys")], capsys)
    assert code == 0


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "complag.cli", "examples"], capture_output=True, text=True)
    assert proc.returncode == 0 and "central-force" in proc.stdout
