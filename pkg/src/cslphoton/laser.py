"""Photon loss from a coherent laser pulse and the spectrum of excited photons.

Pulse model: coherent state with Gaussian mode function
alpha(k) = (pi/sigma^2)^(-3/4) exp(-(k - k0)^2 sigma^2 / 2) and mean photon
number n0.  Everything is first order in lambda t.  The common prefactor

    C = n0 lambda t / M_N^2 (a^2/pi)^(3/2)   (M_N = 1 / lambda_bar_N)

multiplies the excitation density P(k) = C k0 k exp(-(k0 - k)^2 a^2).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import energy_gain
from .quadrature import (
    Envelope,
    GaussianWeight3D,
    angular_gaussian_average,
    integrate_constrained_4k,
    integrate_gaussian_3d,
    integrate_isotropic_gaussian,
    integrate_radial,
)
from .units import CollapseParams, photons_in_pulse, wavelength_to_wavenumber

LOSS_REGIMES = ("low_k0a", "high_k0a", "exact")
FIRST_ORDER_LIMIT = 0.5


@dataclass(frozen=True)
class LaserPulseSpec:
    """Coherent pulse: carrier wavenumber ``k0`` (cm^-1), length scale
    ``sigma`` (cm, also the transverse width), mean photon number ``n_mean0``
    and observation time ``t`` (s)."""

    k0: float
    sigma: float
    n_mean0: float
    t: float = 1.0

    def __post_init__(self):
        if not (self.k0 > 0 and self.sigma > 0):
            raise ValueError("k0 and sigma must be > 0")
        if self.n_mean0 < 0 or self.t < 0:
            raise ValueError("n_mean0 and t must be >= 0")
        ks = self.k0 * self.sigma
        if not ks > 100:
            raise ValueError(f"k0*sigma = {ks:.3g}; the pulse model needs k0*sigma > 100")
        if ks < 1e3:
            warnings.warn(f"k0*sigma = {ks:.3g} < 1e3; narrow-band approximations are marginal",
                          stacklevel=2)

    @classmethod
    def from_wavelength(cls, lambda0, sigma, n_mean0=None, energy=None, t=1.0):
        """Build from wavelength (cm) and either a photon number or a pulse
        energy in joules."""
        if (n_mean0 is None) == (energy is None):
            raise ValueError("give exactly one of n_mean0 or energy")
        if n_mean0 is None:
            n_mean0 = photons_in_pulse(energy, lambda0)
        return cls(float(wavelength_to_wavenumber(lambda0)), sigma, n_mean0, t)

    @property
    def lambda0(self) -> float:
        return 2.0 * math.pi / self.k0

    def at_time(self, t):
        return LaserPulseSpec(self.k0, self.sigma, self.n_mean0, t)


@dataclass(frozen=True)
class PhotonLossResult:
    n_mean_t: float
    loss_coefficient: float     # n(t) = n0 [1 - loss_coefficient * lambda t]
    regime: str
    loss_fraction: float
    valid: bool

    def __post_init__(self):
        if self.regime not in LOSS_REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")


@dataclass
class ExcitationSpectrum:
    k: np.ndarray               # radial grid, cm^-1
    density: np.ndarray         # direction-averaged P(k) per d^3k
    total: float                # int P d^3k
    cumulative_fraction: np.ndarray = field(default=None)
    form: str = "full"


def _prefactor(spec: LaserPulseSpec, params: CollapseParams, t=None) -> float:
    t = spec.t if t is None else t
    return (spec.n_mean0 * params.lambda_rate * t * params.lambda_bar_N**2
            * (params.a**2 / math.pi) ** 1.5)


# -- section III: loss from the pulse ---------------------------------------

def loss_integral_low(k0, a):
    """k0 2 pi / a^4, valid for k0 a << 1."""
    return k0 * 2.0 * math.pi / a**4


def loss_integral_high(k0, a):
    """k0^2 (pi / a^2)^(3/2), valid for k0 a >> 1."""
    return k0 * k0 * (math.pi / a**2) ** 1.5


def loss_integral(k0: float, sigma: float, a: float, tol: float = 1e-9) -> float:
    """(pi/sigma^2)^(-3/2) int d^3k1 d^3k2 k1 k2 exp(-(k1-k2)^2 a^2) exp(-(k1-k0)^2 sigma^2).

    Nested 1-D quadratures: the inner k2 integral is a radial function of
    |k1|, and the outer k1 integral runs over the pulse envelope.
    """
    if not (k0 > 0 and sigma > 0 and a > 0):
        raise ValueError("k0, sigma, a must be > 0")
    if k0 * sigma <= 10:
        raise ValueError("loss_integral needs k0*sigma >> 1")

    def inner(k1):
        return integrate_isotropic_gaussian(lambda k: k, k1, a, tol=tol * 1e-2).value

    outer = integrate_isotropic_gaussian(lambda k: k * inner(k), k0, sigma, tol=tol)
    return outer.value / (math.pi / sigma**2) ** 1.5


def loss_coefficient(spec: LaserPulseSpec, params: CollapseParams, regime: str,
                     tol: float = 1e-9) -> float:
    """Coefficient c of lambda t in n(t) = n0 [1 - c lambda t]."""
    lb, a, n0 = params.lambda_bar_N, params.a, spec.n_mean0
    if regime == "low_k0a":
        return 4.0 * math.sqrt(math.pi) * n0 * lb**2 / (spec.lambda0 * a)
    if regime == "high_k0a":
        # as printed for k0 a >> 1; the k0^2 (pi/a^2)^(3/2) integral would
        # give an extra (2 pi)^2 (see loss_integral_high)
        return n0 * (lb / spec.lambda0) ** 2
    if regime == "exact":
        li = loss_integral(spec.k0, spec.sigma, a, tol)
        return n0 * lb**2 * (a * a / math.pi) ** 1.5 * li
    raise ValueError(f"unknown regime {regime!r}")


def mean_photons(spec: LaserPulseSpec, params: CollapseParams, t: float | None = None,
                 regime: str = "low_k0a") -> PhotonLossResult:
    t = spec.t if t is None else t
    coeff = loss_coefficient(spec, params, regime)
    frac = coeff * params.lambda_rate * t
    return PhotonLossResult(
        n_mean_t=spec.n_mean0 * (1.0 - frac),
        loss_coefficient=coeff,
        regime=regime,
        loss_fraction=frac,
        valid=frac <= FIRST_ORDER_LIMIT,
    )


# -- section IV: excited photons --------------------------------------------

def default_grid(spec: LaserPulseSpec, a: float, n: int = 512) -> np.ndarray:
    """Log-spaced radial grid on [1e-3/a, 10/a + k0]."""
    return np.geomspace(1e-3 / a, 10.0 / a + spec.k0, n)


def _check_grid(k, spec, a):
    k = np.asarray(k, dtype=float)
    if k.ndim != 1 or k.size < 2 or np.any(np.diff(k) <= 0) or k[0] < 0:
        raise ValueError("radial grid must be increasing and non-negative")
    if k[-1] < spec.k0 + 8.0 / a:
        raise ValueError(f"grid ends at {k[-1]:.3g}; need >= k0 + 8/a = {spec.k0 + 8 / a:.3g}")
    if k[0] > max(1e-2 / a, spec.k0 - 8.0 / a):
        raise ValueError(f"grid starts at {k[0]:.3g}; too far into the excitation support")
    return k


def density_3d(kvec, spec: LaserPulseSpec, params: CollapseParams, t=None,
               form: str = "full"):
    """P(k) at 3-vectors ``kvec`` (shape (..., 3)); k0 points along z."""
    kvec = np.asarray(kvec, dtype=float)
    C = _prefactor(spec, params, t)
    kn = np.linalg.norm(kvec, axis=-1)
    a = params.a
    if form == "full":
        d = kvec - np.array([0.0, 0.0, spec.k0])
        g = np.exp(-np.sum(d * d, axis=-1) * a * a)
    elif form == "small_k0a":
        g = np.exp(-kn * kn * a * a)
    else:
        raise ValueError(f"unknown form {form!r}")
    return C * spec.k0 * kn * g


def _radial_density(k, spec, params, t, form):
    C = _prefactor(spec, params, t)
    a = params.a
    if form == "full":
        ang = angular_gaussian_average(k, spec.k0, a) / (4.0 * math.pi)
    elif form == "small_k0a":
        ang = np.exp(-np.asarray(k) ** 2 * a * a)
    else:
        raise ValueError(f"unknown form {form!r}")
    return C * spec.k0 * np.asarray(k) * ang


def excitation_total(spec, params, t=None, form="full", tol=1e-10, tol_abs=0.0):
    """int P(k) d^3k by 1-D quadrature about the origin."""
    C = _prefactor(spec, params, t)
    if C == 0:
        return 0.0
    a = params.a
    if form == "full":
        r = integrate_isotropic_gaussian(lambda k: k, spec.k0, a, tol=tol, tol_abs=tol_abs)
    else:
        r = integrate_isotropic_gaussian(lambda k: k, 0.0, a, tol=tol, tol_abs=tol_abs)
    return C * spec.k0 * r.value


def excitation_density(k, spec: LaserPulseSpec, params: CollapseParams, t=None,
                       form: str = "full") -> ExcitationSpectrum:
    """Direction-averaged excitation density on a radial grid.

    ``form="full"`` uses the k0-centred Gaussian; ``"small_k0a"`` replaces it
    by exp(-k^2 a^2), the k0 a << 1 limit.  ``cumulative_fraction`` is the
    share of the total carried by |k| <= grid point.
    """
    a = params.a
    if k is None:
        k = default_grid(spec, a)
    k = _check_grid(k, spec, a)
    dens = _radial_density(k, spec, params, t, form)
    total = excitation_total(spec, params, t, form)
    if total == 0:
        cum = np.zeros_like(k)
    else:
        def shell(x):
            return 4.0 * math.pi * x * x * _radial_density(x, spec, params, t, form)

        pieces = [0.0]
        if k[0] > 0:
            pieces[0] = integrate_radial(shell, 0.0, k[0], tol=1e-8, tol_abs=1e-14 * total).value
        for lo, hi in zip(k[:-1], k[1:]):
            pieces.append(integrate_radial(shell, lo, hi, tol=1e-8, tol_abs=1e-14 * total).value)
        cum = np.cumsum(pieces) / total
    return ExcitationSpectrum(k=k, density=dens, total=total, cumulative_fraction=cum, form=form)


def residual_bracket(dk, k0: float, sigma: float):
    """k0^2 [2^(3/2) e^{-dk^2 s^2} - 2 (4/3)^(3/2) e^{-dk^2 2 s^2 / 3}], dk = |k - k0|."""
    dk2 = np.asarray(dk, dtype=float) ** 2
    s2 = sigma * sigma
    return k0 * k0 * (2.0**1.5 * np.exp(-dk2 * s2)
                      - 2.0 * (4.0 / 3.0) ** 1.5 * np.exp(-dk2 * 2.0 * s2 / 3.0))


def residual_R(kvec, spec: LaserPulseSpec, params: CollapseParams, t=None):
    """Non-leading part of the excitation probability, confined to |k - k0| ~ 1/sigma."""
    kvec = np.asarray(kvec, dtype=float)
    dk = np.linalg.norm(kvec - np.array([0.0, 0.0, spec.k0]), axis=-1)
    return _prefactor(spec, params, t) * residual_bracket(dk, spec.k0, spec.sigma)


def residual_bracket_integral(k0: float, sigma: float, tol: float = 1e-10) -> float:
    """int d^3k of :func:`residual_bracket` by radial quadrature."""
    f = lambda r: 4.0 * math.pi * r * r * residual_bracket(r, k0, sigma)
    return integrate_radial(f, 0.0, 12.0 / sigma, tol=tol).value


@dataclass(frozen=True)
class ExcitationRate:
    gamma: float                # per laser photon per second
    gamma_n0: float             # anomalous photons per second
    expected: float             # gamma n0 t


def total_excitation_rate(spec: LaserPulseSpec, params: CollapseParams, t=None) -> ExcitationRate:
    """Gamma = 4 sqrt(pi) lambda lb_N^2 / (lambda0 a), the k0 a << 1 rate."""
    t = spec.t if t is None else t
    g = (4.0 * math.sqrt(math.pi) * params.lambda_rate * params.lambda_bar_N**2
         / (spec.lambda0 * params.a))
    return ExcitationRate(gamma=g, gamma_n0=g * spec.n_mean0, expected=g * spec.n_mean0 * t)


def pulse_loss_term(spec, params, t=None, tol=1e-10, tol_abs=0.0):
    """C k0 int d^3k1 k1 exp(-(k1 - k0)^2 a^2), by quadrature about k0."""
    C = _prefactor(spec, params, t)
    if C == 0:
        return 0.0
    w = GaussianWeight3D((0.0, 0.0, spec.k0), params.a)
    r = integrate_gaussian_3d(lambda k: math.sqrt(k @ k), w, tol=tol, tol_abs=tol_abs,
                              radial_points=[spec.k0])
    return C * spec.k0 * r.value


def trace_check(spec: LaserPulseSpec, params: CollapseParams, t=None) -> float:
    """Photon-number deficit: pulse loss minus total excitation, in photons.

    The loss side is the nested envelope integral (:func:`loss_integral`);
    the gain side integrates P(k) directly.  Zero through first order in
    lambda t up to the pulse's spectral width.
    """
    t = spec.t if t is None else t
    if params.lambda_rate == 0 or t == 0 or spec.n_mean0 == 0:
        return 0.0
    loss = loss_coefficient(spec, params, "exact", tol=1e-10) * params.lambda_rate * t
    gain = excitation_total(spec, params, t)
    return gain - loss


def energy_from_spectrum(spec, params, t=None, tol=1e-12):
    """n0-photon energy change int d^3k (k - k0) P(k)."""
    C = _prefactor(spec, params, t)
    if C == 0:
        return 0.0
    k0, a = spec.k0, params.a
    # the (k - k0) k0 ... integrand cancels to O(1/(k0 a)); set the absolute
    # target from the magnitude of the uncancelled pieces
    scale = k0 * (k0 + 1.0 / a) * (math.pi / a**2) ** 1.5 * (k0 + 1.0 / a)
    r = integrate_isotropic_gaussian(lambda k: (k - k0) * k0 * k, k0, a, tol=tol,
                                     tol_abs=1e-15 * scale)
    return C * r.value


def energy_from_heating(spec, params, t=None, tol=1e-12):
    """t dH/dt with dH/dt from the single-photon heating kernel."""
    t = spec.t if t is None else t
    rate = energy_gain.rate_per_particle(spec.k0, 0.0, params, "exact", tol).rate
    return spec.n_mean0 * rate * t


def energy_balance_check(spec: LaserPulseSpec, params: CollapseParams, t=None) -> float:
    """Relative mismatch between the spectrum's energy and the heating rate."""
    e_spec = energy_from_spectrum(spec, params, t)
    e_heat = energy_from_heating(spec, params, t)
    if e_spec == 0 and e_heat == 0:
        return 0.0
    return abs(e_spec - e_heat) / max(abs(e_spec), abs(e_heat))


# -- the n(n-1) - n^2 term ------------------------------------------------------

def appendixB_I(k0: float, sigma: float, a: float) -> float:
    """k0^2 (2 pi)^(3/2) / sigma^3, the sigma >> a value of the four-envelope
    integral with the momentum delta."""
    if sigma <= 2.0 * a:
        warnings.warn("sigma <= 2a: the sigma >> a approximation is degraded", stacklevel=2)
    return k0 * k0 * (2.0 * math.pi) ** 1.5 / sigma**3


def appendixB_I_gaussian(k0: float, sigma: float, a: float) -> float:
    """Same integral with sqrt(k1 k2 k3 k4) -> k0^2 but keeping a^2 + sigma^2/4."""
    A = a * a + sigma * sigma / 4.0
    return (k0 * k0 / (2.0 * math.pi) ** 3 * (math.pi / A) ** 1.5
            * (math.pi / (1.0 / sigma**2 + 1.0 / (4.0 * A))) ** 1.5
            * (4.0 * math.pi / sigma**2) ** 1.5)


def pulse_envelope(k0: float, sigma: float) -> Envelope:
    """alpha(k) as an :class:`Envelope`."""
    return Envelope(GaussianWeight3D((0.0, 0.0, k0), sigma / math.sqrt(2.0)),
                    (sigma**2 / math.pi) ** 0.75)


def appendixB_I_oracle(k0, sigma, a, samples=1_000_000, seed=0, full_sqrt=False):
    """Monte-Carlo value of the four-envelope integral.

    With ``full_sqrt`` the integrand keeps sqrt(|k1||k2||k3||k4|) instead of k0^2.
    """
    env = pulse_envelope(k0, sigma)

    if full_sqrt:
        def g(k1, k2, k3, k4):
            n = [np.linalg.norm(x, axis=1) for x in (k1, k2, k3, k4)]
            return np.sqrt(n[0] * n[1] * n[2] * n[3])
    else:
        def g(k1, k2, k3, k4):
            return np.full(len(k1), k0 * k0)

    return integrate_constrained_4k(g, [env] * 4, a, samples=samples, seed=seed)


def appendixB_ratio(k0, sigma, a):
    """Size of the dropped term relative to k0 2 pi / a^4: sqrt(2 pi) k0 a (a/sigma)^3."""
    return appendixB_I(k0, sigma, a) / loss_integral_low(k0, a)
