"""Physical constants and unit conversions.

Internal convention: hbar = c = 1 with lengths in cm, wavenumbers in cm^-1
and times in s.  Energies are carried as wavenumbers (E / (hbar c)), so a
photon of wavelength ``lam`` has energy ``2 pi / lam`` cm^-1 and a particle of
mass ``m`` has rest "energy" ``1 / lambda_bar`` cm^-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import constants as _c

# CGS-flavoured values derived from CODATA (scipy.constants is SI).
C_CM_S = _c.c * 1e2                     # speed of light, cm/s
H_J_S = _c.h                            # Planck constant, J s
HBAR_J_S = _c.hbar                      # J s
HC_J_CM = _c.h * _c.c * 1e2             # h c, J cm
HBARC_J_CM = _c.hbar * _c.c * 1e2       # hbar c, J cm
HBARC_ERG_CM = HBARC_J_CM * 1e7         # hbar c, erg cm
K_B_J_K = _c.k                          # Boltzmann constant, J/K
EV_J = _c.eV                            # 1 eV in J
SECONDS_PER_YEAR = _c.Julian_year       # s

LAMBDA_BAR_N_DEFAULT = 2.1e-14          # reduced nucleon Compton wavelength, cm
_LAMBDA_BAR_N_RANGE = (1.9e-14, 2.2e-14)


UNIT_POLICY = (
    "natural units hbar = c = 1; lengths in cm; wavenumbers in cm^-1; "
    "times in s; energies carried as wavenumbers (cm^-1); "
    "J and eV via hbar*c"
)


@dataclass(frozen=True)
class PhysicalConstants:
    """Constants shared by every formula.

    ``lambda_bar_N`` is configurable; values outside [1.9e-14, 2.2e-14] cm
    must be requested with ``override=True``.
    """

    lambda_bar_N: float = LAMBDA_BAR_N_DEFAULT
    hbar_c: float = HBARC_ERG_CM
    k_B: float = K_B_J_K
    c: float = C_CM_S
    seconds_per_year: float = SECONDS_PER_YEAR
    override: bool = False

    def __post_init__(self):
        lo, hi = _LAMBDA_BAR_N_RANGE
        if not self.lambda_bar_N > 0:
            raise ValueError("lambda_bar_N must be > 0")
        if not self.override and not lo <= self.lambda_bar_N <= hi:
            raise ValueError(
                f"lambda_bar_N = {self.lambda_bar_N:g} cm outside "
                f"[{lo:g}, {hi:g}]; pass override=True to force it"
            )


@dataclass(frozen=True)
class CollapseParams:
    """Collapse rate ``lambda_rate`` (1/s), length ``a`` (cm) and the
    nucleon reduced Compton wavelength used as the reference mass."""

    lambda_rate: float = 1e-16
    a: float = 1e-5
    lambda_bar_N: float = LAMBDA_BAR_N_DEFAULT
    override: bool = False

    def __post_init__(self):
        if not self.lambda_rate >= 0:
            raise ValueError("lambda_rate must be >= 0")
        if not self.a > 0:
            raise ValueError("a must be > 0")
        # validates lambda_bar_N
        PhysicalConstants(lambda_bar_N=self.lambda_bar_N, override=self.override)

    @property
    def mass_ref(self) -> float:
        """Nucleon mass as an inverse length, cm^-1."""
        return 1.0 / self.lambda_bar_N

    def replace(self, **changes) -> "CollapseParams":
        fields = dict(
            lambda_rate=self.lambda_rate,
            a=self.a,
            lambda_bar_N=self.lambda_bar_N,
            override=self.override,
        )
        fields.update(changes)
        return CollapseParams(**fields)


def _require_positive(name, value):
    if np.any(np.asarray(value) <= 0) or np.any(~np.isfinite(value)):
        raise ValueError(f"{name} must be positive and finite")


def omega(k, M):
    """Relativistic dispersion sqrt(k^2 + M^2), everything in cm^-1."""
    k = np.asarray(k, dtype=float)
    M = np.asarray(M, dtype=float)
    if np.any(k < 0) or np.any(M < 0):
        raise ValueError("omega: k and M must be >= 0")
    out = np.hypot(k, M)
    return float(out) if out.ndim == 0 else out


def wavelength_to_wavenumber(wavelength_cm):
    _require_positive("wavelength", wavelength_cm)
    return 2.0 * math.pi / np.asarray(wavelength_cm, dtype=float)


def wavenumber_to_wavelength(k):
    _require_positive("wavenumber", k)
    return 2.0 * math.pi / np.asarray(k, dtype=float)


def energy_to_wavenumber(energy_J):
    _require_positive("energy", energy_J)
    return np.asarray(energy_J, dtype=float) / HBARC_J_CM


def wavenumber_to_energy(k):
    """Inverse of :func:`energy_to_wavenumber`; returns joules."""
    _require_positive("wavenumber", k)
    return np.asarray(k, dtype=float) * HBARC_J_CM


def nm_to_cm(x):
    return np.asarray(x, dtype=float) * 1e-7


def photon_wavelength_from_energy(energy_eV):
    """Wavelength in cm of a photon with the given energy in eV."""
    _require_positive("photon energy", energy_eV)
    return HC_J_CM / (np.asarray(energy_eV, dtype=float) * EV_J)


def photons_in_pulse(energy, wavelength):
    """Number of photons of wavelength ``wavelength`` (cm) in a pulse of
    ``energy`` joules: E / (h c / lambda)."""
    _require_positive("energy", energy)
    _require_positive("wavelength", wavelength)
    return energy * wavelength / HC_J_CM


def beam_segment_energy(power, length):
    """Energy (J) contained in ``length`` cm of a CW beam of ``power`` W."""
    _require_positive("power", power)
    _require_positive("length", length)
    return power * length / C_CM_S


def thermal_wavelength(T):
    """h c / (k_B T) in cm."""
    _require_positive("temperature", T)
    return HC_J_CM / (K_B_J_K * T)
