"""Decay of the off-diagonal element for N particles in a two-place superposition,
and the short-range commutator kernel of the energy-density operator.

Both branches are N-particle wavepackets with mode function
alpha(k) = (2 sigma^2/pi)^(3/4) exp(-(k - k0)^2 sigma^2), placed at x_L and
x_R a distance d apart.  To first order in lambda t

    <L|rho|R> = 1/2 - N lambda t w^2(k0) / (2 M_N^2) [N (a/sigma)^3 (1 - e^{-d^2/4 sigma^2}) + 1].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .quadrature import Envelope, GaussianWeight3D, IntegrationResult, integrate_constrained_4k
from .units import CollapseParams, omega

ORTHOGONALITY_WARN = 1e-6


@dataclass(frozen=True)
class SuperpositionSpec:
    """N particles of mass M (cm^-1) and momentum k0 (cm^-1, along z) in
    packets of width sigma (cm), separated by d (cm) along x."""

    N: float
    sigma: float
    k0: float
    M: float
    d: float
    a: float = 1e-5

    def __post_init__(self):
        if not self.N >= 1:
            raise ValueError("N must be >= 1")
        if not (self.sigma > 0 and self.k0 > 0 and self.a > 0):
            raise ValueError("sigma, k0, a must be > 0")
        if self.M < 0 or self.d < 0:
            raise ValueError("M and d must be >= 0")
        if not self.k0 * self.a > 3:
            raise ValueError(f"k0*a = {self.k0 * self.a:.3g}; need k0*a > 3")
        if not self.sigma > 3 * self.a:
            raise ValueError(f"sigma/a = {self.sigma / self.a:.3g}; need sigma > 3a")
        if self.overlap > ORTHOGONALITY_WARN:
            warnings.warn(f"<L|R> = {self.overlap:.3g}: branches are not orthogonal",
                          stacklevel=2)

    @property
    def overlap(self) -> float:
        """<L|R> = exp(-N d^2 / (8 sigma^2))."""
        return math.exp(-self.N * self.d**2 / (8.0 * self.sigma**2))

    @property
    def omega0(self) -> float:
        return omega(self.k0, self.M)


@dataclass(frozen=True)
class DecayResult:
    offdiag: float
    bracket: float
    I1: float
    I2: float
    I3: float
    decay: float
    valid: bool

    def __post_init__(self):
        if self.offdiag > 0.5 + 1e-15:
            raise ValueError("offdiag must be <= 1/2")


def integrals_closed(spec: SuperpositionSpec) -> tuple[float, float, float]:
    """(I1, I2, I3) = w^2 ((a/sigma)^3, 1, (a/sigma)^3 e^{-d^2/4 sigma^2})."""
    w2 = spec.omega0**2
    r3 = (spec.a / spec.sigma) ** 3
    return w2 * r3, w2, w2 * r3 * math.exp(-spec.d**2 / (4.0 * spec.sigma**2))


def _branch_envelope(spec):
    w = GaussianWeight3D((0.0, 0.0, spec.k0), spec.sigma)
    return Envelope(w, (2.0 * spec.sigma**2 / math.pi) ** 0.75)


def integrals_oracle(spec: SuperpositionSpec, samples: int = 1_000_000, seed: int = 0):
    """Monte-Carlo values of the three integrals before any approximation.

    I1 and I3 keep sqrt(w1 w2 w3 w4) and the kernel, with k4 fixed by the
    momentum delta; I3 carries the phase cos(d_vec . (k2 - k1)).  I2 reduces
    to E[w(k1) w(k2)] with k1 ~ alpha^2 and k2 ~ the normalized kernel about k1.
    Returns three :class:`IntegrationResult`.
    """
    a, M = spec.a, spec.M
    pre = (a * a / math.pi) ** 1.5
    env = _branch_envelope(spec)
    dvec = np.array([spec.d, 0.0, 0.0])

    def w(k):
        return np.sqrt(np.sum(k * k, axis=1) + M * M)

    def g1(k1, k2, k3, k4):
        return pre * np.sqrt(w(k1) * w(k2) * w(k3) * w(k4))

    def g3(k1, k2, k3, k4):
        return g1(k1, k2, k3, k4) * np.cos((k2 - k1) @ dvec)

    i1 = integrate_constrained_4k(g1, [env] * 4, a, samples=samples, seed=seed)
    i3 = integrate_constrained_4k(g3, [env] * 4, a, samples=samples, seed=seed + 1)

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed + 2)))
    c = np.array([0.0, 0.0, spec.k0])
    k1 = c + rng.standard_normal((samples, 3)) / (2.0 * spec.sigma)
    k2 = k1 + rng.standard_normal((samples, 3)) / (math.sqrt(2.0) * a)
    v = w(k1) * w(k2)
    i2 = IntegrationResult(float(v.mean()), float(v.std(ddof=1) / math.sqrt(samples)), samples)
    return i1, i2, i3


def offdiag_decay(spec: SuperpositionSpec, params: CollapseParams, t: float) -> DecayResult:
    """<L|rho(t)|R> to first order; the (a/sigma)^3 beside the 1 is dropped."""
    if t < 0:
        raise ValueError("t must be >= 0")
    I1, I2, I3 = integrals_closed(spec)
    N = spec.N
    w2 = spec.omega0**2
    bracket = N * (spec.a / spec.sigma) ** 3 * (1.0 - math.exp(-spec.d**2 / (4.0 * spec.sigma**2))) + 1.0
    decay = N * params.lambda_rate * t * w2 * params.lambda_bar_N**2 / 2.0 * bracket
    valid = decay < 0.5
    return DecayResult(0.5 - decay, bracket, I1, I2, I3, decay, valid)


# -- modified Bessel functions of the second kind ---------------------------------

_EULER = 0.5772156649015329
_SERIES_MAX = 2.0
_ASYMPTOTIC_MIN = 25.0
_TRAP_STEP = 0.1


def _k01_series(x):
    """K0, K1 from the ascending series (x <= 2)."""
    q = x * x / 4.0
    lg = math.log(x / 2.0)
    # K0 = -(ln(x/2) + gamma) I0 + sum q^k/(k!)^2 H_k
    # K1 = 1/x + ln(x/2) I1 - (x/4) sum (psi(k+1) + psi(k+2)) q^k / (k! (k+1)!)
    term0 = 1.0                 # q^k / (k!)^2
    term1 = 1.0                 # q^k / (k! (k+1)!)
    I0 = I1s = S0 = S1 = 0.0
    H = 0.0
    for k in range(60):
        if k > 0:
            term0 *= q / (k * k)
            term1 *= q / (k * (k + 1))
            H += 1.0 / k
        I0 += term0
        I1s += term1
        S0 += term0 * H
        psi1 = -_EULER + H
        psi2 = psi1 + 1.0 / (k + 1)
        S1 += term1 * (psi1 + psi2)
        if term0 < 1e-18 * I0 and k > 2:
            break
    K0 = -(lg + _EULER) * I0 + S0
    K1 = 1.0 / x + lg * (x / 2.0) * I1s - (x / 4.0) * S1
    return K0, K1


def _k01_trapezoid(x):
    """K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt by the trapezoidal
    rule, which converges geometrically for this analytic integrand."""
    t_max = math.acosh(800.0 / x) if x < 800.0 else 1.0
    n = int(t_max / _TRAP_STEP) + 2
    t = np.arange(n) * _TRAP_STEP
    e = np.exp(-x * np.cosh(t))
    w = np.ones(n)
    w[0] = 0.5
    K0 = _TRAP_STEP * float(np.sum(w * e))
    K1 = _TRAP_STEP * float(np.sum(w * e * np.cosh(t)))
    return K0, K1


def _k_asymptotic(nu, x):
    """sqrt(pi/2x) e^{-x} sum_k prod_j (4 nu^2 - (2j-1)^2) / (k! (8x)^k), truncated at the smallest term."""
    mu = 4.0 * nu * nu
    total, term = 1.0, 1.0
    for k in range(1, 80):
        nxt = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(nxt) > abs(term) or abs(nxt) < 1e-17 * abs(total):
            total += nxt if abs(nxt) <= abs(term) else 0.0
            break
        total += nxt
        term = nxt
    return math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) * total


def besselk01(x: float) -> tuple[float, float]:
    """(K0(x), K1(x)) for x > 0."""
    if not x > 0:
        raise ValueError("x must be > 0")
    if x <= _SERIES_MAX:
        return _k01_series(x)
    if x < _ASYMPTOTIC_MIN:
        return _k01_trapezoid(x)
    return _k_asymptotic(0.0, x), _k_asymptotic(1.0, x)


def besselk0(x: float) -> float:
    return besselk01(x)[0]


def besselk1(x: float) -> float:
    return besselk01(x)[1]


def besselk2(x: float) -> float:
    """K2 = K0 + 2 K1 / x (recurrence)."""
    K0, K1 = besselk01(x)
    return K0 + 2.0 * K1 / x


# -- commutator kernel -----------------------------------------------------------

KERNEL_FORMS = ("exact", "asymptotic", "printed")


def commutator_kernel(r: float, M: float, form: str = "exact") -> float:
    """(1/2 pi^2 r) int_0^inf k sqrt(k^2 + M^2) sin(kr) dk (Abel-regularized).

    ``exact``:      -M^2 K2(Mr) / (2 pi^2 r^2) = -(M^2 / 2 pi^2 r^2)[K0 + 2 K1/(Mr)]
    ``asymptotic``: -[(2 pi)^3 lb^3 r^5]^(-1/2) e^{-Mr}, lb = 1/M, valid for Mr >> 1
    ``printed``:    -(M^2 / 2 pi^2 r^2)[K0 + K1/(Mr)], kept for comparison; it
                    disagrees with the integral it is meant to equal.
    """
    if not r > 0:
        raise ValueError("r must be > 0")
    if not M > 0:
        raise ValueError("M must be > 0; the massless kernel diverges")
    x = M * r
    pre = -M * M / (2.0 * math.pi**2 * r * r)
    if form == "exact":
        return pre * besselk2(x)
    if form == "printed":
        K0, K1 = besselk01(x)
        return pre * (K0 + K1 / x)
    if form == "asymptotic":
        lb = 1.0 / M
        return -math.exp(-x) / math.sqrt((2.0 * math.pi) ** 3 * lb**3 * r**5)
    raise ValueError(f"unknown form {form!r}")


def regulated_kernel(r: float, M: float, eps: float) -> float:
    """(1/2 pi^2 r) int_0^inf k w(k) sin(kr) e^{-eps k} dk at finite eps.

    k w(k) is split as k^2 + M^2/2 + rest; the first two integrate in closed
    form and the remainder (decaying as k^-2) by Fourier quadrature.
    """
    from scipy import integrate

    if not (r > 0 and M > 0 and eps > 0):
        raise ValueError("r, M, eps must be > 0")
    z = complex(eps, -r)
    quad_k2 = (2.0 / z**3).imag                       # int k^2 sin(kr) e^{-eps k}
    const = r / (eps * eps + r * r)                   # int sin(kr) e^{-eps k}

    def rest(k):
        # k sqrt(k^2 + M^2) - k^2 - M^2/2, written without cancellation
        s = math.sqrt(k * k + M * M)
        return (k * M * M / (s + k) - 0.5 * M * M) * math.exp(-eps * k)

    v, _ = integrate.quad(rest, 0.0, np.inf, weight="sin", wvar=r, limlst=100)
    return (quad_k2 + 0.5 * M * M * const + v) / (2.0 * math.pi**2 * r)


def regulated_kernel_limit(r: float, M: float, eps_fracs=(0.2, 0.1, 0.05, 0.025)) -> float:
    """eps -> 0 limit of :func:`regulated_kernel` by polynomial (Richardson)
    extrapolation over eps = frac * r."""
    eps = np.array(eps_fracs) * r
    vals = np.array([regulated_kernel(r, M, e) for e in eps])
    coeffs = np.polyfit(eps, vals, len(eps) - 1)
    return float(coeffs[-1])
