import math

import pytest
from hypothesis import given, strategies as st

from cslphoton.config import KINDS, SCHEMAS, ConfigError, parse_config

VULCAN = """
# petawatt pulse
[laser-loss]
lambda0_nm = 1053
sigma_cm = 0.01
n0 = 2.5e21
lambda_rate = 1e-16
a_cm = 1e-5
t_s = 1
"""


def errors(text):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    return exc.value.errors


def test_minimal_laser_config():
    cfg = parse_config(VULCAN, "vulcan")
    assert cfg.kind == "laser-loss"
    assert cfg.get("lambda0_nm") == 1053.0 and cfg.get("n0") == 2.5e21
    assert cfg.is_set("lambda0_nm") and not cfg.is_set("k0_cm_inv")
    assert cfg.lines["sigma_cm"] == 5


def test_empty_file():
    assert errors("") == ["missing scenario kind"]
    assert errors("# only a comment\n") == ["missing scenario kind"]


def test_negative_lambda():
    errs = errors("[energy-gain]\nlambda_rate = -1\n")
    assert errs == ["line 2: lambda_rate must be ≥ 0"]


def test_errors_are_collected_with_lines():
    errs = errors("[laser-loss]\nlambda0_nm = 1053 cm\nfoo = 1\nsigma_cm = 0.01\nsigma_cm = 0.02\nn0 = x\n")
    assert any(e.startswith("line 2: unit mismatch") for e in errs)
    assert any(e.startswith("line 3: unknown key 'foo'") for e in errs)
    assert any(e.startswith("line 5: duplicate key 'sigma_cm'") for e in errs)
    assert any(e.startswith("line 6:") for e in errs)


def test_unit_suffix_accepted():
    cfg = parse_config("[superposition]\nN = 10\nsigma_cm = 2e-4 cm\nk0_cm_inv = 1e6 cm^-1\nd_cm = 0.01\n")
    assert cfg.get("k0_cm_inv") == 1e6


def test_unit_on_dimensionless_key():
    assert "unit mismatch" in errors("[superposition]\nN = 10 cm\n")[0]


def test_unknown_kind():
    assert "unknown scenario kind" in errors("[nonsense]\n")[0]


def test_key_before_header():
    assert "before the scenario header" in errors("a_cm = 1\n[validate]\n")[0]


def test_missing_required_and_either():
    errs = errors("[laser-loss]\nlambda0_nm = 1053\n")
    assert "missing key 'sigma_cm' for [laser-loss]" in errs
    assert "[laser-loss] needs one of n0, energy_J" in errs
    errs = errors("[laser-loss]\nlambda0_nm = 1053\nlambda0_cm = 1e-4\nsigma_cm = 1\nn0 = 1\n")
    assert any("give only one of" in e for e in errs)


def test_choice_and_bool_and_int():
    assert any("form must be one of" in e for e in errors(VULCAN.replace("[laser-loss]", "[excitation]") + "form = wide\n"))
    assert parse_config("[validate]\nquick = yes\n").get("quick") is True
    assert "must be an integer" in errors("[validate]\nsamples = 1.5\n")[0]
    assert "boolean" in errors("[validate]\nquick = maybe\n")[0]


def test_defaults_filled():
    cfg = parse_config("[cosmology]\n")
    assert cfg.get("T0_K") == 2.72548 and cfg.get("Z0") == 1000.0
    assert cfg.get("lambda_rate") == 1e-16


def test_echo_sorted_and_complete():
    cfg = parse_config(VULCAN)
    echo = cfg.echo()
    assert echo == sorted(echo) and len(echo) == len(SCHEMAS["laser-loss"])


@given(st.sampled_from(KINDS), st.text(alphabet="abcdefghijklmnopqrstuvwxyz_", min_size=1, max_size=12))
def test_unknown_keys_always_rejected(kind, key):
    if key in SCHEMAS[kind]:
        return
    errs = errors(f"[{kind}]\n{key} = 1\n")
    assert any(f"unknown key '{key}'" in e for e in errs)


@given(st.floats(1e-30, 1e30))
def test_float_round_trip(x):
    cfg = parse_config(f"[cosmology]\nT0_K = {x!r}\n")
    assert cfg.get("T0_K") == x


def test_non_finite_rejected():
    assert "finite" in errors("[cosmology]\nT0_K = inf\n")[0]
    assert errors("[cosmology]\nT0_K = nan\n")
