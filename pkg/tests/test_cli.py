import csv

import numpy as np
import pytest

from cslphoton import cli
from cslphoton.config import parse_config


def run(tmp_path, name, *extra):
    out = tmp_path / f"{name}.csv"
    code = cli.main(["--config", name, "--out", str(out), *extra])
    return code, out.read_text()


def rows(text):
    body = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.DictReader(body))


def test_bundled_scenarios_listed():
    assert {"vulcan", "lcls", "cw-megawatt", "cmb-default", "superposition-demo", "fock-demo",
            "validate"} <= set(cli.bundled_scenarios())


def test_vulcan_summary(tmp_path, capsys):
    code, text = run(tmp_path, "vulcan", "--strict")
    assert code == 0
    out = capsys.readouterr().out
    low = float(out.split("loss_coefficient_low_k0a: ")[1].split()[0])
    assert low == pytest.approx(0.75e4, rel=0.1)
    assert "WARNING" in out               # k0 sigma < 1e3 is reported, not fatal
    r = rows(text)
    assert [x["regime"] for x in r] == ["low_k0a", "high_k0a", "exact"]


def test_csv_header(tmp_path):
    _, text = run(tmp_path, "vulcan", "--seed", "9")
    head = [l for l in text.splitlines() if l.startswith("#")]
    assert head[0].startswith("# tool: cslphoton ")
    assert "# kind: laser-loss" in head and "# seed: 9" in head
    assert any(l.startswith("# config: n0 = ") for l in head)
    assert head[-1].startswith("# units: regime, loss_coefficient [")


def test_byte_identical(tmp_path):
    _, a = run(tmp_path, "superposition-demo", "--samples", "100000")
    _, b = run(tmp_path, "superposition-demo", "--samples", "100000")
    assert a == b


def test_seed_changes_monte_carlo(tmp_path):
    _, a = run(tmp_path, "superposition-demo", "--samples", "100000", "--seed", "1")
    _, b = run(tmp_path, "superposition-demo", "--samples", "100000", "--seed", "2")
    assert rows(a)[0]["integrals_oracle"] != rows(b)[0]["integrals_oracle"]


def test_cosmology_row_at_1mm(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("[cosmology]\nlambda_rate = 1\n")
    out = tmp_path / "c.csv"
    assert cli.main(["--config", str(path), "--out", str(out)]) == 0
    r = {float(x["lambda0_cm"]): x for x in rows(out.read_text())}
    assert float(r[0.1]["fractional_loss"]) == pytest.approx(0.6, rel=0.1)


def test_strict_flags_exit_nonzero(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("[cosmology]\nlambda_rate = 10\n")       # loss >= 1 at short wavelengths
    assert cli.main(["--config", str(path), "--out", str(tmp_path / "o.csv")]) == 0
    assert cli.main(["--config", str(path), "--out", str(tmp_path / "o.csv"), "--strict"]) == cli.EXIT_FLAGGED


def test_config_errors_exit(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("")
    assert cli.main(["--config", str(path)]) == cli.EXIT_CONFIG
    assert "missing scenario kind" in capsys.readouterr().err


def test_missing_file_exit(tmp_path):
    assert cli.main(["--config", str(tmp_path / "none.cfg")]) == cli.EXIT_IO


def test_unwritable_output(tmp_path):
    assert cli.main(["--config", "lcls", "--out", str(tmp_path / "no" / "dir.csv")]) == cli.EXIT_IO


def test_energy_gain_kind(tmp_path):
    path = tmp_path / "e.cfg"
    path.write_text("[energy-gain]\nk1a_min = 0.02\nk1a_max = 20\npoints = 3\n")
    out = tmp_path / "e.csv"
    assert cli.main(["--config", str(path), "--out", str(out)]) == 0
    r = rows(out.read_text())
    assert float(r[-1]["f_exact"]) == pytest.approx(float(r[-1]["f_high_ka"]), rel=5e-3)
    assert float(r[0]["f_exact"]) == pytest.approx(float(r[0]["f_low_ka_photon"]), rel=2e-2)


def test_excitation_kind(tmp_path, capsys):
    code, text = run(tmp_path, "cw-megawatt")
    assert code == 0
    r = rows(text)
    assert float(r[-1]["cumulative_fraction"]) == pytest.approx(1.0, abs=1e-9)
    out = capsys.readouterr().out
    y = float(out.split("yield_per_t_year: ")[1].split()[0])
    assert y / 1e-6 == pytest.approx(4e6, rel=0.15)


def test_fock_kind(tmp_path):
    code, text = run(tmp_path, "fock-demo")
    assert code == 0
    r = rows(text)
    tr = np.array([float(x["trace"]) for x in r])
    assert np.max(np.abs(tr - 1)) <= 1e-8
    coh = [float(x) for k, x in r[0].items() if k.startswith("abs_coherence")]
    assert coh == [pytest.approx(0.5)]


def test_run_without_io():
    cfg = parse_config("[laser-loss]\nlambda0_cm = 1e-8\nsigma_cm = 1e-4\nn0 = 1e12\n"
                       "lambda_bar_N_cm = 1e-13\noverride = true\n")
    res = cli.run(cfg)
    assert dict(res.summary)["loss_coefficient_high_k0a"] == pytest.approx(100.0)


def test_validate_quick(tmp_path, capsys):
    path = tmp_path / "v.cfg"
    path.write_text("[validate]\nquick = true\n")
    out = tmp_path / "v.csv"
    assert cli.main(["--config", str(path), "--out", str(out), "--strict"]) == 0
    assert all(x["passed"] == "true" for x in rows(out.read_text()))
    assert "PASS" in capsys.readouterr().out
