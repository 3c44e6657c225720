"""Collapse-induced heating of free particles.

The single-particle kernel

    f(k1) = int d^3k2 w1 w2 (w2 - w1) exp(-(k2 - k1)^2 a^2),  w = sqrt(k^2 + M^2)

sets the mean-energy rate dH/dt = (lambda / M_N^2) (a^2/pi)^(3/2) <sum n(k1) f(k1)>.
It is evaluated exactly by quadrature and in its two analytic regimes.  Regime
choice is never automatic; :func:`validate` reports all three side by side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .quadrature import GaussianWeight3D, integrate_gaussian_3d
from .units import HBARC_J_CM, CollapseParams, omega

REGIMES = ("exact", "low_ka", "high_ka", "nonrel")

FREE_PARTICLE_NOTE = "relativistic massive-particle rates hold for free particles only"


@dataclass(frozen=True)
class EnergyGainResult:
    rate: float                 # cm^-1 / s
    regime: str
    inputs: dict = field(default_factory=dict)
    note: str = ""

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        if not math.isfinite(self.rate):
            raise ValueError("rate must be finite")

    @property
    def rate_J_per_s(self) -> float:
        return self.rate * HBARC_J_CM


def _check(k1, M, a):
    if k1 < 0 or M < 0:
        raise ValueError("k1 and M must be >= 0")
    if not a > 0:
        raise ValueError("a must be > 0")


def f_exact(k1: float, M: float, a: float, tol: float = 1e-10) -> float:
    """f(k1) by (radius, polar angle) quadrature about k1."""
    _check(k1, M, a)
    w1 = omega(k1, M)
    center = (0.0, 0.0, float(k1))

    def integrand(d):
        # k2 = k1 z + d; k2^2 - k1^2 formed from d to avoid cancellation
        dq = d[2] * (2.0 * k1 + d[2]) + d[0] * d[0] + d[1] * d[1]
        w2 = math.sqrt(k1 * k1 + dq + M * M)
        return w1 * w2 * dq / (w2 + w1)

    # |k1 + Delta| has a cone kink at Delta = -k1 when M is small
    points = [k1] if k1 > 0 else None
    return integrate_gaussian_3d(
        integrand, GaussianWeight3D(center, a), tol=tol, axis=(0, 0, 1),
        radial_points=points, offset=True,
    ).value


def f_low_ka_photon(k1: float, a: float) -> float:
    """Photon kernel for k1 a << 1: k1 (pi/a^2)^(3/2) 3/(2 a^2)."""
    return k1 * (math.pi / a**2) ** 1.5 * 1.5 / a**2


def f_high_ka(k1: float, M: float, a: float) -> float:
    """k1 a >> 1 kernel, dropping O((k1 a)^-2): w1 pi^(3/2)/a^5 [3/4 + k1^2/(4 w1^2)]."""
    _check(k1, M, a)
    w1 = omega(k1, M)
    if w1 == 0:
        return 0.0
    return w1 * math.pi**1.5 / a**5 * (0.75 + k1 * k1 / (4.0 * w1 * w1))


def f_nonrel(k1: float, M: float, a: float) -> float:
    """Non-relativistic kernel: w1 w2 (w2 - w1) ~ M (k2^2 - k1^2) / 2."""
    _check(k1, M, a)
    return 0.5 * M * (math.pi**1.5 / a**3) * 1.5 / a**2


def mean_energy_growth(H_mean: float, k_regime: str, params: CollapseParams) -> float:
    """dH/dt for photons proportional to H: (3/2) lambda (lb_N/a)^2 H for
    ``low_ka`` and lambda (lb_N/a)^2 H for ``high_ka``."""
    if H_mean < 0:
        raise ValueError("H_mean must be >= 0")
    base = params.lambda_rate * (params.lambda_bar_N / params.a) ** 2 * H_mean
    if k_regime == "low_ka":
        return 1.5 * base
    if k_regime == "high_ka":
        return base
    raise ValueError(f"unknown regime {k_regime!r}; use 'low_ka' or 'high_ka'")


def growth_exponent(params: CollapseParams, T: float) -> float:
    """lambda T (lb_N / a)^2, the e-folding count of energy growth over T."""
    return params.lambda_rate * T * (params.lambda_bar_N / params.a) ** 2


def dHdt_nonrel(N: float, M: float, params: CollapseParams) -> float:
    """lambda (3 / (4 M a^2)) (M / M_N)^2 N, cm^-1/s (hbar = c = 1)."""
    if N < 0:
        raise ValueError("N must be >= 0")
    if not M > 0:
        raise ValueError("M must be > 0; massless particles use the photon forms")
    a = params.a
    return params.lambda_rate * 3.0 / (4.0 * M * a * a) * (M / params.mass_ref) ** 2 * N


def _prefactor(params: CollapseParams) -> float:
    return params.lambda_rate / params.mass_ref**2 * (params.a**2 / math.pi) ** 1.5


def rate_per_particle(k1: float, M: float, params: CollapseParams, regime: str,
                      tol: float = 1e-10) -> EnergyGainResult:
    """Energy gain rate of a single particle of momentum k1 in the named regime."""
    a = params.a
    if regime == "exact":
        f = f_exact(k1, M, a, tol)
    elif regime == "low_ka":
        if M != 0:
            raise ValueError("the low_ka form is for photons (M = 0)")
        f = f_low_ka_photon(k1, a)
    elif regime == "high_ka":
        f = f_high_ka(k1, M, a)
    elif regime == "nonrel":
        f = f_nonrel(k1, M, a)
    else:
        raise ValueError(f"unknown regime {regime!r}")
    note = FREE_PARTICLE_NOTE if M > 0 and regime in ("exact", "high_ka") else ""
    return EnergyGainResult(
        rate=_prefactor(params) * f,
        regime=regime,
        inputs=dict(k1=k1, M=M, a=a, lambda_rate=params.lambda_rate),
        note=note,
    )


def validate(k1: float, M: float, params: CollapseParams, tol: float = 1e-10) -> dict:
    """Exact rate next to each applicable asymptotic form."""
    out = {"exact": rate_per_particle(k1, M, params, "exact", tol)}
    out["high_ka"] = rate_per_particle(k1, M, params, "high_ka")
    if M == 0:
        out["low_ka"] = rate_per_particle(k1, M, params, "low_ka")
    else:
        out["nonrel"] = rate_per_particle(k1, M, params, "nonrel")
    exact = out["exact"].rate
    out["relative_error"] = {
        k: (v.rate - exact) / exact for k, v in out.items() if k != "exact"
    }
    out["k1a"] = k1 * params.a
    return out


def f_exact_grid(k1s, M: float, a: float, tol: float = 1e-10) -> np.ndarray:
    return np.array([f_exact(float(k), M, a, tol) for k in np.atleast_1d(k1s)])
