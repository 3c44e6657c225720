"""Collapse-induced distortion of the cosmic microwave background.

Collapse kicks photons out of thermally populated modes into modes with
k ~ 1/a.  Integrated from recombination to today with a linear redshift
history, the surviving occupancy of a mode of present wavelength lambda0 is
the Planck value times [1 - loss], loss proportional to 1/lambda0.

Everything is per unit volume; the normalization box never appears.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import energy_gain
from .quadrature import angular_gaussian_average, integrate_radial
from .units import C_CM_S, H_J_S, K_B_J_K, CollapseParams, thermal_wavelength

ZETA4 = math.pi**4 / 90.0
VALIDITY_LIMIT = 0.3        # k0 (1 + Z0) a below this keeps e^{-(ks-k1)^2 a^2} ~ e^{-k1^2 a^2}


@dataclass(frozen=True)
class CosmologyScenario:
    T0: float = 2.72548         # K
    t0: float = 4.0e17          # s
    Z0: float = 1000.0
    params: CollapseParams = field(default_factory=CollapseParams)
    delta: float = 2e-4         # relative temperature uncertainty

    def __post_init__(self):
        for name in ("T0", "t0", "Z0", "delta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")

    @property
    def lambda_th0(self) -> float:
        """Present thermal wavelength h c / (k_B T0), cm."""
        return float(thermal_wavelength(self.T0))

    @property
    def beta0(self) -> float:
        """1 / (k_B T0) as a length (cm): lambda_th0 / 2 pi."""
        return self.lambda_th0 / (2.0 * math.pi)


@dataclass(frozen=True)
class SpectrumPoint:
    lambda0: float              # cm
    nu0: float                  # Hz
    planck: float               # photons per cm^3 per Hz
    distorted: float
    fractional_loss: float
    valid: bool                 # approximation validity (short-wavelength caveat)
    first_order: bool           # fractional_loss < 1

    def __post_init__(self):
        if self.planck < 0:
            raise ValueError("occupancy must be >= 0")


def redshift_time_integral(scenario: CosmologyScenario) -> float:
    """(1/t0) int_0^t0 [1 + Z(t)] dt for Z(t) = Z0 (1 - t/t0): 1 + Z0/2."""
    return 1.0 + scenario.Z0 / 2.0


def loss_coefficient(scenario: CosmologyScenario) -> float:
    """C with fractional loss = C lambda / lambda0 (lambda in s^-1, lambda0 in cm)."""
    p = scenario.params
    return (4.0 * math.sqrt(math.pi) * p.lambda_bar_N**2 / p.a
            * scenario.t0 * redshift_time_integral(scenario))


def fractional_loss(lambda0, scenario: CosmologyScenario):
    """4 sqrt(pi) (lb_N^2 / (a c)) nu0 lambda t0 (1 + Z0/2), nu0 = c / lambda0."""
    lambda0 = np.asarray(lambda0, dtype=float)
    return loss_coefficient(scenario) * scenario.params.lambda_rate / lambda0


def planck_occupancy(nu0, T):
    """Photons per unit volume per unit frequency, 8 pi nu^2 / (c^3 [e^{h nu / k T} - 1])."""
    nu0 = np.asarray(nu0, dtype=float)
    x = H_J_S * nu0 / (K_B_J_K * T)
    return 8.0 * math.pi * nu0**2 / (C_CM_S**3 * np.expm1(x))


def default_wavelengths(lo: float = 0.05, hi: float = 50.0, per_decade: int = 40) -> np.ndarray:
    """Log grid on [lo, hi] cm anchored so that powers of ten are grid points."""
    if not 0 < lo < hi or per_decade < 1:
        raise ValueError("need 0 < lo < hi and per_decade >= 1")
    j = np.arange(math.ceil(math.log10(lo) * per_decade - 1e-9),
                  math.floor(math.log10(hi) * per_decade + 1e-9) + 1)
    grid = 10.0 ** (j / per_decade)
    gap = 10.0 ** (0.5 / per_decade)       # drop anchors crowding the endpoints
    inner = grid[(grid > lo * gap) & (grid < hi / gap)]
    return np.concatenate(([lo], inner, [hi]))


def validity_flag(lambda0, scenario: CosmologyScenario):
    k0 = 2.0 * math.pi / np.asarray(lambda0, dtype=float)
    return k0 * (1.0 + scenario.Z0) * scenario.params.a < VALIDITY_LIMIT


def distorted_spectrum(lambda0=None, scenario: CosmologyScenario | None = None):
    """Planck and collapse-depleted occupancy on a grid of present wavelengths (cm)."""
    scenario = scenario or CosmologyScenario()
    lam = default_wavelengths() if lambda0 is None else np.asarray(lambda0, dtype=float)
    if np.any(lam <= 0):
        raise ValueError("wavelengths must be > 0")
    nu = C_CM_S / lam
    planck = planck_occupancy(nu, scenario.T0)
    loss = fractional_loss(lam, scenario)
    ok = validity_flag(lam, scenario)
    return [
        SpectrumPoint(float(l), float(n), float(p), float(p * (1.0 - f)), float(f),
                      bool(v), bool(f < 1.0))
        for l, n, p, f, v in zip(lam, nu, planck, loss, ok)
    ]


# -- single-mode evolution -----------------------------------------------------

def bose_integral(beta: float, zeta: str = "exact") -> float:
    """int d^3k k / (e^{beta k} - 1) = 4 pi Gamma(4) zeta(4) / beta^4.

    ``zeta="paper"`` sets zeta(4) to 1.
    """
    if not beta > 0:
        raise ValueError("beta must be > 0")
    z = {"exact": ZETA4, "paper": 1.0}[zeta]
    return 4.0 * math.pi * 6.0 * z / beta**4


def _prefactor(params: CollapseParams, t: float) -> float:
    return params.lambda_rate * t * params.lambda_bar_N**2 * (params.a**2 / math.pi) ** 1.5


@dataclass(frozen=True)
class GainLoss:
    loss: float                 # 2 k_s x (second bracket term), energy units
    gain: float                 # the last term, energy units
    ratio: float                # loss / gain, no occupancy factor
    occupancy_ratio: float      # loss n_s / gain, the actual depletion vs refill


def gain_term(lambda_s: float, scenario: CosmologyScenario, t: float = 1.0) -> GainLoss:
    """Refill and depletion terms of a mode of wavelength ``lambda_s`` in the
    small-ka approximation (zeta(4) -> 1, as written):

        gain = k_s 24 (2pi)^6 / pi^(3/2) lambda t lb^2 a^3 / (lambda_Th^4 lambda_s)
        loss = 2 k_s 4 sqrt(pi) lambda t lb^2 / (a lambda_s)

    The plain ratio is pi^2 lambda_Th^4 / (3 (2 pi)^6 a^4), dominated by a^-4.
    """
    if not lambda_s > 0:
        raise ValueError("lambda_s must be > 0")
    p = scenario.params
    lth = scenario.lambda_th0
    ks = 2.0 * math.pi / lambda_s
    lt = p.lambda_rate * t
    gain = ks * 24.0 * (2.0 * math.pi) ** 6 / math.pi**1.5 * lt * p.lambda_bar_N**2 * p.a**3 / (
        lth**4 * lambda_s)
    loss = 2.0 * ks * 4.0 * math.sqrt(math.pi) * lt * p.lambda_bar_N**2 / (p.a * lambda_s)
    ratio = (math.pi**2 * lth**4 / (3.0 * (2.0 * math.pi) ** 6 * p.a**4)
             if lt == 0 else loss / gain)
    n_s = 1.0 / math.expm1(lth / lambda_s)
    return GainLoss(loss, gain, ratio, ratio * n_s)


def spectral_peak_wavelength(scenario: CosmologyScenario) -> float:
    """~0.1 cm peak of the energy per unit wavelength, lambda_th / 4.965."""
    return scenario.lambda_th0 / 4.965114231744276


@dataclass(frozen=True)
class ModeState:
    energy: float               # mean energy in the mode, both polarizations, cm^-1
    occupancy: float            # energy / k_s
    planck_energy: float
    loss_fraction: float


def _thermal(k, beta):
    k = np.asarray(k, dtype=float)
    with np.errstate(over="ignore", divide="ignore"):
        return np.where(k > 0, 1.0 / np.expm1(beta * np.where(k > 0, k, 1.0)), 0.0)


def _thermal_cutoff(beta):
    return 60.0 / beta


def _kernel_moment(ks, a, tol=1e-11):
    """h(k_s) = int d^3k1 k1 exp(-(k_s - k1)^2 a^2)."""
    lo = max(0.0, ks - 10.0 / a)
    f = lambda k: k * k * k * angular_gaussian_average(k, ks, a)
    return integrate_radial(f, lo, ks + 10.0 / a, tol=tol, points=[ks]).value


def _thermal_moment(ks, a, beta, tol=1e-11):
    """g(k_s) = int d^3k1 k1 n(k1) exp(-(k_s - k1)^2 a^2), n thermal."""
    cut = _thermal_cutoff(beta)
    lo = max(0.0, ks - 10.0 / a)
    hi = min(cut, ks + 10.0 / a)
    if lo >= hi:
        return 0.0
    f = lambda k: k**3 * _thermal(k, beta) * angular_gaussian_average(k, ks, a)
    pts = [x for x in (1.0 / beta, 5.0 / beta, ks) if lo < x < hi]
    return integrate_radial(f, lo, hi, tol=tol, tol_abs=0.0, points=pts).value


def mode_evolution(k_s: float, scenario: CosmologyScenario, t: float,
                   kernel: str = "approx", T: float | None = None) -> ModeState:
    """Mean energy of mode k_s after time t at temperature T (default T0).

    ``kernel="approx"`` replaces exp(-(k_s - k1)^2 a^2) by exp(-k1^2 a^2) in
    the loss (closed form 2 pi / a^4) and by 1 in the refill (Bose integral,
    exact zeta(4)).  ``kernel="full"`` keeps the exact kernel, by quadrature.
    """
    if not k_s > 0:
        raise ValueError("k_s must be > 0")
    T = scenario.T0 if T is None else T
    beta = float(thermal_wavelength(T)) / (2.0 * math.pi)
    p = scenario.params
    n_s = 1.0 / math.expm1(beta * k_s)
    pre = _prefactor(p, t)
    if kernel == "approx":
        loss_int = 2.0 * math.pi / p.a**4
        gain_int = bose_integral(beta)
    elif kernel == "full":
        loss_int = _kernel_moment(k_s, p.a)
        gain_int = _thermal_moment(k_s, p.a, beta)
    else:
        raise ValueError(f"unknown kernel {kernel!r}")
    planck = 2.0 * k_s * n_s
    loss_frac = pre * k_s * loss_int
    energy = planck * (1.0 - loss_frac) + 2.0 * pre * k_s * k_s * gain_int
    return ModeState(energy, energy / k_s, planck, loss_frac)


# -- conservation checks with the full kernel ------------------------------------

@dataclass(frozen=True)
class ConservationCheck:
    first: float
    second: float
    residual: float             # |first - second| / max(|first|, |second|)


def _check(x, y):
    return ConservationCheck(x, y, abs(x - y) / max(abs(x), abs(y)))


def number_conservation(scenario: CosmologyScenario, T: float | None = None,
                        tol: float = 1e-10) -> ConservationCheck:
    """The two one-signed parts of int d^3k_s dn_s/dt.

    dn_s/dt is proportional to k_s int d^3k1 k1 (n_s - n_1) G(k_s - k1).
    The n_s part integrates the kernel first; the n_1 part integrates the
    thermal population first.  They must agree.
    """
    T = scenario.T0 if T is None else T
    beta = float(thermal_wavelength(T)) / (2.0 * math.pi)
    a = scenario.params.a
    cut = _thermal_cutoff(beta)
    shell = 4.0 * math.pi

    out_s = integrate_radial(
        lambda k: shell * k**3 * _thermal(k, beta) * _kernel_moment(k, a),
        0.0, cut, tol=tol, points=[1.0 / beta, 5.0 / beta]).value
    out_1 = integrate_radial(
        lambda k: shell * k**3 * _thermal_moment(k, a, beta),
        0.0, cut + 10.0 / a, tol=tol, points=[cut, 1.0 / a]).value
    return _check(out_s, out_1)


def energy_conservation(scenario: CosmologyScenario, T: float | None = None,
                        tol: float = 1e-10) -> ConservationCheck:
    """Mode-summed energy change against the heating-kernel energy change.

    First: int d^3k_s k_s^2 int d^3k1 k1 (n_1 - n_s) G, from the single-mode
    equation.  Second: int d^3k1 n_1 f(k1) with the photon heating kernel f.
    """
    T = scenario.T0 if T is None else T
    beta = float(thermal_wavelength(T)) / (2.0 * math.pi)
    a = scenario.params.a
    cut = _thermal_cutoff(beta)
    shell = 4.0 * math.pi

    gain = integrate_radial(
        lambda k: shell * k**4 * _thermal_moment(k, a, beta),
        0.0, cut + 10.0 / a, tol=tol * 1e-2, points=[cut, 1.0 / a]).value
    loss = integrate_radial(
        lambda k: shell * k**4 * _thermal(k, beta) * _kernel_moment(k, a),
        0.0, cut, tol=tol * 1e-2, points=[1.0 / beta, 5.0 / beta]).value
    first = gain - loss

    second = integrate_radial(
        lambda k: shell * k * k * _thermal(k, beta) * energy_gain.f_exact(k, 0.0, a),
        0.0, cut, tol=tol, points=[1.0 / beta, 5.0 / beta]).value
    return _check(first, second)


# -- temperature degeneracy -------------------------------------------------------

@dataclass(frozen=True)
class DegeneracyVerdict:
    lambda0: float
    x: float                    # lambda_th0 / lambda0
    bracket_coefficient: float  # Delta multiplier in the shifted-temperature bracket
    regime: str                 # "short", "long" or "intermediate"
    degenerate: bool
    effective_delta_per_lambda: float | None
    lambda_bound: float | None  # s^-1


def temperature_bracket(x: float) -> float:
    """Coefficient of Delta in the Planck bracket at T0 (1 - Delta): x e^x / (e^x - 1)."""
    return x / -math.expm1(-x)


def temperature_degeneracy(lambda0: float, scenario: CosmologyScenario) -> DegeneracyVerdict:
    """Can a collapse depletion at lambda0 be absorbed into a temperature shift?

    Short wavelengths (x = lambda_th0 / lambda0 >= 2, e^x - 1 ~ e^x): the
    bracket is 1 - x Delta, also ~ 1/lambda0, so the depletion looks like a
    cooler blackbody with Delta = C lambda / lambda_th0 and sets no bound.
    Long wavelengths (x <= 1): the bracket is ~ 1 - Delta, so the depletion
    must hide inside the error: C lambda / lambda0 <= Delta.
    """
    if not lambda0 > 0:
        raise ValueError("lambda0 must be > 0")
    C = loss_coefficient(scenario)
    x = scenario.lambda_th0 / lambda0
    coeff = temperature_bracket(x)
    if x >= 2.0:
        return DegeneracyVerdict(lambda0, x, coeff, "short", True, C / scenario.lambda_th0, None)
    if x <= 1.0:
        return DegeneracyVerdict(lambda0, x, coeff, "long", False, None,
                                 scenario.delta * lambda0 / C)
    return DegeneracyVerdict(lambda0, x, coeff, "intermediate", False, None, None)
