import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cslphoton import lindblad_fock as lf
from cslphoton.units import CollapseParams

L = 2 * math.pi


def model(modes=((0, 0, 1), (1, 0, 0), (0, 1, 1)), c0=0.05, a=0.5, nmax=3, **kw):
    return lf.FockModel(lf.ModeGrid(modes, L, **kw), c0=c0, a=a, nmax=nmax)


def random_state(D, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))
    rho = X @ X.conj().T
    return lf.DensityState(rho / np.trace(rho).real)


# -- grid and model ----------------------------------------------------------------

def test_grid_validation():
    with pytest.raises(ValueError):
        lf.ModeGrid([(0, 0, 1), (0, 0, 1)], L)
    with pytest.raises(ValueError):
        lf.ModeGrid([(i, 0, 0) for i in range(7)], L)
    with pytest.raises(ValueError):
        lf.ModeGrid([(0, 0)], L)
    with pytest.raises(ValueError):
        lf.ModeGrid([(0, 0, 1)], -1.0)


def test_grid_dispersion():
    g = lf.ModeGrid([(0, 0, 1), (3, 4, 0)], L=2 * math.pi, M=0.0)
    assert np.allclose(g.omega, [1.0, 5.0])
    assert np.allclose(lf.ModeGrid([(0, 0, 0)], L, M=2.0).omega, [2.0])


def test_dimension_overflow():
    with pytest.raises(ValueError):
        model(modes=[(i, 0, 0) for i in range(6)], nmax=4)     # 5^6 > 4096


def test_from_params_c0():
    p = CollapseParams()
    g = lf.ModeGrid([(0, 0, 1)], 1.0)
    m = lf.FockModel.from_params(g, p)
    assert m.c0 == pytest.approx(p.lambda_rate * p.lambda_bar_N**2 * (p.a**2 / math.pi) ** 1.5 * (2 * math.pi) ** 3)


def test_basis_index():
    m = model()
    assert m.basis_index([0, 0, 0]) == 0
    assert m.basis_index([1, 2, 3]) == 1 * 16 + 2 * 4 + 3
    with pytest.raises(ValueError):
        m.basis_index([4, 0, 0])


# -- generator ------------------------------------------------------------------------

@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_generator_trace_free_and_hermitian(seed):
    m = model(nmax=2)
    rho = random_state(m.dim, seed).rho
    out = lf.build_generator(m)(rho)
    assert abs(np.trace(out)) <= 1e-12
    assert np.max(np.abs(out - out.conj().T)) <= 1e-12


def test_generator_on_identity():
    m = model()
    out = lf.build_generator(m)(np.eye(m.dim) / m.dim)
    assert abs(np.trace(out)) <= 1e-12


def test_superoperator_matches_generator():
    m = model(nmax=2)
    rho = random_state(m.dim, 5).rho
    S = lf.build_superoperator(m)
    v = (S @ rho.reshape(-1)).reshape(m.dim, m.dim)
    assert np.allclose(v, lf.build_generator(m)(rho), atol=1e-13)


def test_single_mode_diagonal_fixed():
    m = model(modes=[(0, 0, 1)], nmax=4)
    rho = np.diag([0.1, 0.2, 0.3, 0.25, 0.15]).astype(complex)
    assert np.allclose(lf.build_generator(m)(rho), 0.0, atol=1e-15)


def test_single_mode_dephasing():
    m = model(modes=[(0, 0, 1)], nmax=3, c0=0.2)
    out = lf.evolve(lf.superposition_state(m, [0], [2]), m, 3.0)
    # |rho_02| decays by exp(-c0/2 w^2 (0 - 2)^2 t)
    assert abs(out.rho[0, 2]) == pytest.approx(0.5 * math.exp(-0.5 * 0.2 * 4 * 3.0), rel=1e-9)


def test_number_state_conserves_total():
    m = model()
    st0 = lf.number_state(m, [2, 1, 0])
    out = lf.evolve(st0, m, 2.0)
    assert abs(lf.observables(out, m).number - 3.0) <= 1e-10


# -- states and observables --------------------------------------------------------

def test_vacuum_and_number_states():
    m = model()
    o = lf.observables(lf.number_state(m, [0, 0, 0]), m)
    assert o.number == 0 and o.energy == 0 and np.all(o.occupancy == 0)
    o = lf.observables(lf.number_state(m, [1, 3, 2]), m)
    assert list(o.occupancy) == [1, 3, 2]


def test_thermal_occupancy():
    m = model(a=0.5)
    beta = 10.0      # beta w >= 10: truncation at nmax = 3 is below 1e-12
    o = lf.observables(lf.thermal_state(m, beta), m)
    ref = 1 / np.expm1(beta * m.grid.omega)
    assert np.allclose(o.occupancy, ref, rtol=1e-9, atol=0)
    trunc = [lf.truncated_thermal_occupancy(beta, w, 3) for w in m.grid.omega]
    assert np.allclose(o.occupancy, trunc, rtol=1e-13)


def test_thermal_truncated_occupancy_low_beta():
    m = model()
    o = lf.observables(lf.thermal_state(m, 0.5), m)
    trunc = [lf.truncated_thermal_occupancy(0.5, w, 3) for w in m.grid.omega]
    assert np.allclose(o.occupancy, trunc, rtol=1e-13)


def test_coherent_state_poisson():
    m = model(modes=[(0, 0, 1)], nmax=30)
    o = lf.observables(lf.coherent_state(m, [1.5]), m)
    assert o.number == pytest.approx(2.25, rel=1e-9)


def test_density_state_checks():
    with pytest.raises(ValueError):
        lf.DensityState(np.array([[1.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        lf.DensityState(np.ones((2, 3)))


# -- evolution -------------------------------------------------------------------------

def test_unitary_limit():
    m = model(c0=0.0)
    st0 = lf.superposition_state(m, [1, 0, 0], [0, 1, 1])
    i, j = m.basis_index([1, 0, 0]), m.basis_index([0, 1, 1])
    out = lf.evolve(st0, m, 0.7, method="rk4")
    assert np.allclose(np.diag(out.rho), np.diag(st0.rho), atol=1e-10)
    assert abs(abs(out.rho[i, j]) - 0.5) <= 1e-10


@pytest.mark.parametrize("beta", [1.0, 3.0])
def test_exact_and_rk4_agree(beta):
    m = model(nmax=2)
    st0 = lf.thermal_state(m, beta)
    t = 1.0 / m.norm_estimate()
    a = lf.evolve(st0, m, t, method="exact").rho
    b = lf.evolve(st0, m, t, method="rk4").rho
    assert np.max(np.abs(a - b)) <= 1e-10


def test_rk4_step_guard():
    m = model(nmax=2)
    with pytest.raises(ValueError):
        lf.evolve(lf.thermal_state(m, 1.0), m, 10.0, steps=1, method="rk4")


def test_invariants_over_evolution():
    m = model()
    st0 = lf.thermal_state(m, 1.0)
    o0 = lf.observables(st0, m)
    out = lf.evolve(st0, m, 2.0 / m.norm_estimate())
    o1 = lf.observables(out, m)
    assert abs(o1.trace - o0.trace) <= 1e-8
    assert abs(o1.number - o0.number) <= 1e-8
    assert out.min_eigenvalue() >= -1e-8


@pytest.mark.parametrize("fixture", ["low_number", "low_thermal", "low_coherent"])
def test_energy_grows(fixture):
    # support concentrated in the lowest mode, below the kernel's spectral centre
    m = model(modes=((0, 0, 1), (1, 1, 0), (1, 1, 1)), c0=0.05, a=0.3)
    st0 = {"low_number": lambda: lf.number_state(m, [2, 0, 0]),
           "low_thermal": lambda: lf.thermal_state(m, 2.0),
           "low_coherent": lambda: lf.coherent_state(m, [1.0, 0.1, 0.0])}[fixture]()
    ts = lf.evolve_series(st0, m, np.linspace(0, 3.0, 7))
    assert np.all(np.diff(ts.energy) > 0)


def test_first_order_rates():
    m = model(c0=1e-3)
    for st0 in (lf.thermal_state(m, 3.0), lf.number_state(m, [2, 0, 1])):
        occ = lf.observables(st0, m).occupancy
        t = 1e-2          # c0 w^2 t ~ 1e-4
        out = lf.observables(lf.evolve(st0, m, t), m).occupancy
        ana = lf.number_rates(m, occ)
        assert np.allclose((out - occ) / t, ana, rtol=5e-2, atol=1e-3 * np.max(np.abs(ana)))


def test_energy_rate_coherent():
    g = lf.ModeGrid([(0, 0, 1), (1, 0, 1)], L)
    m = lf.FockModel(g, c0=1e-3, a=0.5, nmax=6)
    st0 = lf.coherent_state(m, [0.8, 0.5])
    occ = lf.observables(st0, m).occupancy
    t = 1e-2
    slope = (lf.observables(lf.evolve(st0, m, t), m).energy - lf.observables(st0, m).energy) / t
    assert slope == pytest.approx(lf.energy_rate(m, occ), rel=5e-2)


def test_coherence_decay_scales_with_omega_squared():
    g = lf.ModeGrid([(0, 0, 1), (1, 0, 1)], L)
    m1 = lf.FockModel(g, c0=1e-3, a=0.5, nmax=3)
    m2 = lf.FockModel(g.with_energies(2 * g.omega), c0=1e-3, a=0.5, nmax=3)
    r1 = lf.coherence_decay_rate(m1, [1, 0], [0, 1], 1.0)
    r2 = lf.coherence_decay_rate(m2, [1, 0], [0, 1], 1.0)
    assert r2 / r1 == pytest.approx(4.0, abs=0.2)


def test_coherence_decays_monotonically():
    m = model()
    pair = (m.basis_index([1, 0, 0]), m.basis_index([0, 0, 1]))
    ts = lf.evolve_series(lf.superposition_state(m, [1, 0, 0], [0, 0, 1]), m,
                          np.linspace(0, 5, 11), pairs=[pair])
    c = ts.coherences[pair]
    assert np.all(np.diff(c) < 0)


def test_series_truncation_flag():
    m = model(nmax=2)
    ts = lf.evolve_series(lf.thermal_state(m, 0.2), m, [0.0, 0.1])
    assert ts.truncation_flag
    ts = lf.evolve_series(lf.thermal_state(m, 20.0), m, [0.0, 0.1])
    assert not ts.truncation_flag


def test_series_rejects_decreasing_times():
    m = model(nmax=1)
    with pytest.raises(ValueError):
        lf.evolve_series(lf.thermal_state(m, 1.0), m, [0.0, 1.0, 0.5])
