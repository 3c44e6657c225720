import math

import pytest
from hypothesis import given, strategies as st

from cslphoton import units
from cslphoton.units import CollapseParams, PhysicalConstants

positive = st.floats(min_value=1e-12, max_value=1e12, allow_nan=False, allow_infinity=False)


@given(positive)
def test_wavelength_round_trip(lam):
    back = units.wavenumber_to_wavelength(units.wavelength_to_wavenumber(lam))
    assert back == pytest.approx(lam, rel=1e-12)


@given(positive)
def test_energy_round_trip(E):
    back = units.wavenumber_to_energy(units.energy_to_wavenumber(E))
    assert back == pytest.approx(E, rel=1e-12)


@pytest.mark.parametrize("k, M, w", [(0, 5, 5), (3, 4, 5), (5.97e4, 0, 5.97e4)])
def test_omega(k, M, w):
    assert units.omega(k, M) == pytest.approx(w, rel=1e-15)


def test_omega_negative():
    with pytest.raises(ValueError):
        units.omega(-1.0, 0.0)


def test_photons_in_pulse_petawatt():
    # 500 J / (h c / 1053 nm); the rounded 2.5e21 is 6% below the exact count
    n = units.photons_in_pulse(500.0, 1.053e-4)
    assert n == pytest.approx(500.0 * 1.053e-4 / (6.62607015e-34 * 2.99792458e10), rel=1e-12)
    assert n == pytest.approx(2.65e21, rel=1e-2)


def test_photons_in_pulse_xray():
    # 1 mJ of 8.3 keV photons: 1e-3 / (8.3e3 * 1.602e-19) = 7.5e11, "about 1e12"
    lam = units.photon_wavelength_from_energy(8.3e3)
    n = units.photons_in_pulse(1e-3, lam)
    assert n == pytest.approx(1e-3 / (8.3e3 * 1.602176634e-19), rel=1e-12)
    assert 5e11 < n < 2e12


def test_photons_in_cw_segment():
    assert units.photons_in_pulse(1e-2, 1.0e-4) == pytest.approx(5e16, rel=0.1)


@pytest.mark.parametrize("P, L, E", [(1e6, 300.0, 1e-2), (1.0, 2.99792458e10, 1.0), (2e5, 300.0, 2e-3)])
def test_beam_segment_energy(P, L, E):
    assert units.beam_segment_energy(P, L) == pytest.approx(E, rel=1e-3)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf])
def test_conversions_reject_bad(bad):
    with pytest.raises(ValueError):
        units.photons_in_pulse(bad, 1e-4)


def test_thermal_wavelength_cmb():
    assert units.thermal_wavelength(2.72548) == pytest.approx(0.528, rel=1e-3)


def test_lambda_bar_range():
    PhysicalConstants(lambda_bar_N=2.0e-14)
    with pytest.raises(ValueError):
        PhysicalConstants(lambda_bar_N=1e-13)
    PhysicalConstants(lambda_bar_N=1e-13, override=True)


def test_collapse_params():
    p = CollapseParams()
    assert p.mass_ref == pytest.approx(1 / 2.1e-14)
    assert p.replace(a=2e-5).a == 2e-5
    with pytest.raises(ValueError):
        CollapseParams(lambda_rate=-1.0)
    with pytest.raises(ValueError):
        CollapseParams(a=0.0)
