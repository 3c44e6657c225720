import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from cslphoton.quadrature import (
    Envelope, GaussianWeight3D, IntegrationResult, QuadratureError, angular_gaussian_average,
    integrate_constrained_4k, integrate_gaussian_3d, integrate_isotropic_gaussian, integrate_radial,
)


@pytest.mark.parametrize("f, ref", [
    (lambda k: math.exp(-k * k), math.sqrt(math.pi) / 2),
    (lambda k: k**3 / math.expm1(k) if 0 < k < 700 else 0.0, math.pi**4 / 15),
    (lambda k: (k / math.expm1(k) if k > 0 else 1.0) if k < 700 else 0.0, math.pi**2 / 6),
])
def test_radial_known_integrals(f, ref):
    r = integrate_radial(f, 0.0, math.inf, tol=1e-10)
    assert r.value == pytest.approx(ref, rel=1e-9)
    assert r.evaluations > 0


def test_radial_failure_carries_best_estimate():
    with pytest.raises(QuadratureError) as exc:
        integrate_radial(lambda x: math.sin(1e4 * x) * x, 0.0, 1e3, tol=1e-12, limit=3)
    assert isinstance(exc.value.best, IntegrationResult)


def test_integration_result_validation():
    with pytest.raises(ValueError):
        IntegrationResult(1.0, -1.0, 3)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 5.0), st.floats(0.2, 3.0))
def test_gaussian_normalization(c, a):
    w = GaussianWeight3D((0.0, 0.3 * c, c), a)
    v = integrate_gaussian_3d(lambda k: 1.0, w, tol=1e-10).value
    assert v == pytest.approx(w.norm, rel=1e-8)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_gaussian_moment(a):
    k0 = 3.0
    w = GaussianWeight3D((0.0, 0.0, k0), a)
    v = integrate_gaussian_3d(lambda k: k @ k - k0 * k0, w, tol=1e-11).value
    assert v == pytest.approx(math.pi**1.5 / a**3 * 1.5 / a**2, rel=1e-6)


@pytest.mark.parametrize("a", [0.5, 1.0])
def test_gaussian_abs_k(a):
    w = GaussianWeight3D((0.0, 0.0, 0.0), a)
    v = integrate_gaussian_3d(lambda k: float(np.linalg.norm(k)), w, tol=1e-10).value
    assert v == pytest.approx(2 * math.pi / a**4, rel=1e-7)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 20.0), st.floats(0.0, 20.0), st.floats(0.1, 3.0))
def test_angular_average_matches_direct(k, c, s):
    # direct polar-cosine quadrature, with the peak factored out to avoid underflow
    peak = (k - c) ** 2 * s * s
    direct = 2 * math.pi * quad(lambda mu: math.exp(-(k * k + c * c - 2 * k * c * mu) * s * s + peak),
                                -1, 1, epsabs=0, epsrel=1e-12, limit=200)[0]
    assert angular_gaussian_average(k, c, s) == pytest.approx(direct * math.exp(-peak), rel=1e-9, abs=1e-300)


def test_isotropic_matches_3d():
    g = lambda k: k**1.5
    a = integrate_isotropic_gaussian(g, 2.0, 0.8, tol=1e-10).value
    b = integrate_gaussian_3d(lambda k: float(np.linalg.norm(k)) ** 1.5,
                              GaussianWeight3D((0.0, 0.0, 2.0), 0.8), tol=1e-10).value
    assert a == pytest.approx(b, rel=1e-7)


def _envs(k0, sigma):
    amp = (2 * sigma**2 / math.pi) ** 0.75
    return [Envelope(GaussianWeight3D((0.0, 0.0, k0), sigma), amp) for _ in range(4)]


def test_constrained_kernel_free_equals_b4():
    # with a = 0 the Gaussian algebra is exact: k0^2 (2 pi)^(3/2) / sigma^3
    k0, sigma = 5.0, 2.0
    r = integrate_constrained_4k(lambda k1, k2, k3, k4: np.full(len(k1), k0 * k0),
                                 [Envelope(GaussianWeight3D((0.0, 0.0, k0), sigma / math.sqrt(2)),
                                           (sigma**2 / math.pi) ** 0.75)] * 4, a=0.0,
                                 samples=200_000, seed=3)
    ref = k0**2 * (2 * math.pi) ** 1.5 / sigma**3
    assert abs(r.value - ref) <= 3 * r.error_estimate + 1e-12 * ref


def test_constrained_deterministic_and_worker_independent():
    envs = _envs(2.0, 1.5)
    g = lambda k1, k2, k3, k4: np.sum(k1 * k4, axis=1)
    r1 = integrate_constrained_4k(g, envs, 0.5, samples=150_000, seed=7)
    r2 = integrate_constrained_4k(g, envs, 0.5, samples=150_000, seed=7, workers=3)
    assert r1 == r2


def test_constrained_rejects():
    envs = _envs(1.0, 1.0)
    g = lambda *k: np.ones(len(k[0]))
    with pytest.raises(ValueError):
        integrate_constrained_4k(g, envs, 1.0, samples=10)
    with pytest.raises(ValueError):
        integrate_constrained_4k(g, envs[:3], 1.0, samples=100_000)
    with pytest.raises(ValueError):
        GaussianWeight3D((0, 0, 0), 0.0)
