"""The oracle suite: each closed form or fast path checked against an
independent numerical route."""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np

from . import cosmology, energy_gain, laser, lindblad_fock, superposition
from .quadrature import GaussianWeight3D, integrate_gaussian_3d, integrate_radial
from .units import CollapseParams


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    reference: float
    tolerance: float
    passed: bool
    seconds: float = 0.0

    @property
    def error(self) -> float:
        return rel(self.value, self.reference)


def rel(x, ref):
    return abs(x - ref) / abs(ref) if ref != 0 else abs(x)


def _rel_check(name, value, reference, tol, t0):
    return Check(name, value, reference, tol, rel(value, reference) <= tol, time.perf_counter() - t0)


def _timed(fn):
    t0 = time.perf_counter()
    return fn(t0)


def check_gaussian_moment(t0):
    a = 1.0
    w = GaussianWeight3D((0.0, 0.0, 3.0), a)
    v = integrate_gaussian_3d(lambda k: k @ k - 9.0, w, tol=1e-10).value
    return _rel_check("quadrature: int (k^2-k0^2) gaussian", v, math.pi**1.5 / a**3 * 1.5 / a**2, 1e-6, t0)


def check_high_ka(t0):
    a, k1 = 1.0, 20.0
    return _rel_check("energy_gain: f_exact vs high-ka form at k1a=20",
                      energy_gain.f_exact(k1, 0.0, a), energy_gain.f_high_ka(k1, 0.0, a), 5e-3, t0)


def check_low_ka(t0):
    a, k1 = 1.0, 0.02
    return _rel_check("energy_gain: f_exact vs low-ka form at k1a=0.02",
                      energy_gain.f_exact(k1, 0.0, a), energy_gain.f_low_ka_photon(k1, a), 2e-2, t0)


def check_loss_integral_low(t0):
    a, k0 = 1.0, 0.01
    return _rel_check("laser: loss_integral vs k0 2pi/a^4 at k0a=0.01",
                      laser.loss_integral(k0, 2e4, a), laser.loss_integral_low(k0, a), 2e-2, t0)


def check_loss_integral_high(t0):
    a, k0 = 1.0, 30.0
    return _rel_check("laser: loss_integral vs k0^2 (pi/a^2)^1.5 at k0a=30",
                      laser.loss_integral(k0, 100.0, a), laser.loss_integral_high(k0, a), 1e-2, t0)


def _cw_spec():
    return laser.LaserPulseSpec.from_wavelength(1e-4, 1.0, n_mean0=5e16)


def check_trace(t0):
    p = CollapseParams(lambda_rate=1e-6)
    spec = _cw_spec()
    res = laser.trace_check(spec, p)
    loss = laser.loss_coefficient(spec, p, "exact") * 1e-6
    return Check("laser: trace residual / first-order loss (CW)", abs(res) / loss, 0.0, 1e-3,
                 abs(res) <= 1e-3 * loss, time.perf_counter() - t0)


def check_energy_balance(t0):
    p = CollapseParams(lambda_rate=1e-6)
    m = laser.energy_balance_check(_cw_spec(), p)
    return Check("laser: energy balance, spectrum vs heating kernel (CW)", m, 0.0, 1e-6, m <= 1e-6,
                 time.perf_counter() - t0)


def check_appendix_b(samples):
    def run(t0):
        k0, sigma, a = 10.0, 100.0, 1.0
        r = laser.appendixB_I_oracle(k0, sigma, a, samples=samples)
        ref = laser.appendixB_I(k0, sigma, a)
        z = abs(r.value - ref) / r.error_estimate
        return Check("laser: B4 closed form vs constrained Monte Carlo (in SE)", z, 0.0, 3.0, z <= 3.0,
                     time.perf_counter() - t0)
    return run


def check_residual_cancels(t0):
    k0, sigma = 1e4, 1e-2
    v = laser.residual_bracket_integral(k0, sigma)
    return _rel_check("laser: integrated R bracket cancels B4", -v,
                      laser.appendixB_I(k0, sigma, sigma / 100.0), 1e-2, t0)


def check_bose(t0):
    beta = 0.7
    q = integrate_radial(lambda k: 4 * math.pi * k**3 / math.expm1(beta * k) if k > 0 else 0.0,
                         0.0, 80.0 / beta, tol=1e-10).value
    return _rel_check("cosmology: Bose integral vs quadrature", q, cosmology.bose_integral(beta), 1e-6, t0)


def check_number_conservation(t0):
    c = cosmology.number_conservation(cosmology.CosmologyScenario())
    return Check("cosmology: photon-number conservation (full kernel)", c.residual, 0.0, 1e-6,
                 c.residual <= 1e-6, time.perf_counter() - t0)


def check_superposition(samples):
    def run(t0):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")     # d = 0: branches overlap on purpose
            spec = superposition.SuperpositionSpec(N=1e4, sigma=20.0, k0=10.0, M=0.0, d=0.0, a=1.0)
        closed = superposition.integrals_closed(spec)
        oracle = superposition.integrals_oracle(spec, samples=samples)
        worst = max(abs(o.value - c) / max(3 * o.error_estimate, 0.05 * c) for o, c in zip(oracle, closed))
        return Check("superposition: I1, I2, I3 vs Monte Carlo (max of |diff|/allowed)", worst, 0.0, 1.0,
                     worst <= 1.0, time.perf_counter() - t0)
    return run


def check_bessel(t0):
    # derivative identity K1' = -K0 - K1/x by five-point differences
    worst = 0.0
    k1 = superposition.besselk1
    for x in (0.5, 1.5, 3.0, 10.0, 30.0):
        h = 1e-3 * x
        d = (k1(x - 2 * h) - 8 * k1(x - h) + 8 * k1(x + h) - k1(x + 2 * h)) / (12 * h)
        K0, K1 = superposition.besselk01(x)
        worst = max(worst, rel(d, -K0 - K1 / x))
    return Check("superposition: Bessel K0/K1 derivative identity", worst, 0.0, 1e-6, worst <= 1e-6,
                 time.perf_counter() - t0)


def check_commutator(t0):
    return _rel_check("superposition: commutator kernel vs regulated quadrature at Mr=1",
                      superposition.commutator_kernel(1.0, 1.0),
                      superposition.regulated_kernel_limit(1.0, 1.0), 1e-2, t0)


def _fock_model():
    grid = lindblad_fock.ModeGrid([[0, 0, 1], [1, 0, 0], [0, 1, 1]], L=2 * math.pi)
    return lindblad_fock.FockModel(grid, c0=0.05, a=0.5, nmax=3)


def check_fock_rates(t0):
    m = _fock_model()
    st = lindblad_fock.thermal_state(m, 3.0)
    occ = lindblad_fock.observables(st, m).occupancy
    num, _ = lindblad_fock.generator_rates(st, m)
    ana = lindblad_fock.number_rates(m, occ)
    worst = float(np.max(np.abs(num - ana) / np.abs(ana)))
    return Check("fock: occupancy rates vs discrete first-order analytics", worst, 0.0, 5e-2, worst <= 5e-2,
                 time.perf_counter() - t0)


def check_fock_invariants(t0):
    m = _fock_model()
    st = lindblad_fock.thermal_state(m, 3.0)
    o0 = lindblad_fock.observables(st, m)
    o1 = lindblad_fock.observables(lindblad_fock.evolve(st, m, 5.0), m)
    drift = max(abs(o1.trace - o0.trace), abs(o1.number - o0.number))
    return Check("fock: trace and number drift", drift, 0.0, 1e-8, drift <= 1e-8, time.perf_counter() - t0)


def run_suite(samples: int = 1_000_000, quick: bool = False) -> list[Check]:
    samples = 100_000 if quick else samples
    checks = [
        check_gaussian_moment, check_high_ka, check_low_ka, check_loss_integral_low,
        check_loss_integral_high, check_trace, check_energy_balance, check_appendix_b(samples),
        check_residual_cancels, check_bose, check_bessel, check_commutator,
        check_superposition(samples), check_fock_rates, check_fock_invariants,
    ]
    if not quick:
        checks.append(check_number_conservation)
    return [_timed(c) for c in checks]
