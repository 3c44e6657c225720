"""Numerical integration used as the independent check on closed forms.

Three engines:

* :func:`integrate_radial` -- adaptive 1-D Gauss-Kronrod (QUADPACK via scipy).
* :func:`integrate_gaussian_3d` -- d^3k integrals against a Gaussian weight for
  integrands azimuthally symmetric about the axis through the origin and the
  weight's center, reduced to nested (radius, polar angle) quadrature.
* :func:`integrate_constrained_4k` -- Monte-Carlo estimate of the 12-D integral
  with a momentum-conservation delta, k4 eliminated as k1 - k2 + k3.

:func:`integrate_isotropic_gaussian` is a faster 1-D special case for radial
integrands, where the angular integral of the Gaussian is done in closed form.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

# Gaussian support is cut at center + TAIL / width (tail < e^-100).
TAIL = 10.0
DEFAULT_RTOL = 1e-8
DEFAULT_SAMPLES = 1_000_000
BATCH = 1 << 16


@dataclass(frozen=True)
class IntegrationResult:
    value: float
    error_estimate: float
    evaluations: int

    def __post_init__(self):
        if self.error_estimate < 0:
            raise ValueError("error_estimate must be >= 0")
        if self.evaluations <= 0:
            raise ValueError("evaluations must be > 0")

    def __float__(self):
        return float(self.value)


class QuadratureError(RuntimeError):
    """Raised when an integration fails to converge; ``best`` holds the
    estimate reached before giving up."""

    def __init__(self, message: str, best: IntegrationResult):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class GaussianWeight3D:
    """The weight exp(-(k - center)^2 s^2) on R^3."""

    center: tuple[float, float, float]
    s: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if len(self.center) != 3:
            raise ValueError("center must be a 3-vector")
        if not self.s > 0:
            raise ValueError("width parameter s must be > 0")

    @property
    def norm(self) -> float:
        """Integral of the weight over R^3, (pi / s^2)^(3/2)."""
        return (math.pi / self.s**2) ** 1.5

    def __call__(self, k):
        d = np.asarray(k) - np.asarray(self.center)
        return np.exp(-np.sum(d * d, axis=-1) * self.s**2)


@dataclass(frozen=True)
class Envelope:
    """``amplitude * weight(k)``; one factor of a 4-k integrand."""

    weight: GaussianWeight3D
    amplitude: float = 1.0

    def __call__(self, k):
        return self.amplitude * self.weight(k)


def _quad(f, lo, hi, rtol, atol, points=None, limit=200):
    kw = dict(epsrel=rtol, epsabs=atol, limit=limit, full_output=1)
    if points is not None:
        pts = [p for p in points if lo < p < hi]
        if pts and math.isfinite(lo) and math.isfinite(hi):
            kw["points"] = sorted(pts)
    out = integrate.quad(f, lo, hi, **kw)
    value, err, info = out[0], out[1], out[2]
    ok = len(out) == 3  # a 4th element (message) signals a problem
    return value, abs(err), info["neval"], ok, (out[3] if not ok else "")


def integrate_radial(
    f: Callable[[float], float],
    k_min: float,
    k_max: float,
    tol: float = DEFAULT_RTOL,
    tol_abs: float = 0.0,
    points: Sequence[float] | None = None,
    limit: int = 200,
) -> IntegrationResult:
    """Adaptive integral of ``f`` over [k_min, k_max] (k_max may be inf).

    Converged means ``|error| <= max(tol * |value|, tol_abs)``; otherwise
    :class:`QuadratureError` is raised carrying the best estimate.
    """
    if not tol > 0:
        raise ValueError("tol must be > 0")
    if not k_min < k_max:
        raise ValueError("need k_min < k_max")
    value, err, nev, ok, msg = _quad(f, k_min, k_max, tol, tol_abs, points, limit)
    res = IntegrationResult(value, err, max(nev, 1))
    if not ok and err > max(tol * abs(value), tol_abs):
        raise QuadratureError(f"radial quadrature did not converge: {msg}", res)
    return res


def _frame(center, axis):
    """Orthonormal (e1, e3) with e3 along the symmetry axis."""
    c = np.asarray(center, dtype=float)
    if axis is not None:
        e3 = np.asarray(axis, dtype=float)
    elif np.linalg.norm(c) > 0:
        e3 = c
    else:
        e3 = np.array([0.0, 0.0, 1.0])
    e3 = e3 / np.linalg.norm(e3)
    trial = np.array([1.0, 0.0, 0.0]) if abs(e3[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = trial - e3 * (trial @ e3)
    return e1 / np.linalg.norm(e1), e3


def integrate_gaussian_3d(
    f: Callable[[np.ndarray], float],
    weight: GaussianWeight3D,
    tol: float = DEFAULT_RTOL,
    tol_abs: float = 0.0,
    axis=None,
    radial_points: Sequence[float] | None = None,
    offset: bool = False,
) -> IntegrationResult:
    """Integral of f(k) exp(-(k - center)^2 s^2) d^3k.

    ``f`` takes a single 3-vector and must be symmetric under rotations about
    ``axis`` (default: the direction of the center, or z if the center is the
    origin).  The azimuth is integrated analytically; radius (about the
    center, cut at 10/s) and polar cosine are integrated adaptively.
    ``radial_points`` are known kinks of the inner integral in the radius.
    With ``offset=True`` f receives Delta = k - center instead of k, which
    lets callers form differences like k^2 - |center|^2 without cancellation.
    """
    if not tol > 0:
        raise ValueError("tol must be > 0")
    c = np.asarray(weight.center, dtype=float)
    e1, e3 = _frame(c, axis)
    s2 = weight.s**2
    r_max = TAIL / weight.s
    inner_tol = tol * 1e-2
    count = 0
    failures = []

    def inner(r):
        nonlocal count

        def g(mu):
            st = math.sqrt(max(0.0, 1.0 - mu * mu))
            d = r * (mu * e3 + st * e1)
            return f(d) if offset else f(c + d)

        # cancellation in mu is common (odd parts), so the absolute target
        # is set from the integrand's magnitude rather than its integral
        scale = 2.0 * max(abs(g(-1.0)), abs(g(0.0)), abs(g(1.0)))
        atol = inner_tol * scale
        v, e, n, ok, msg = _quad(g, -1.0, 1.0, inner_tol, atol)
        count += n + 3
        if not ok and e > max(inner_tol * abs(v), 10 * atol):
            failures.append(msg)
        return 2.0 * math.pi * r * r * math.exp(-r * r * s2) * v

    v, e, n, ok, msg = _quad(inner, 0.0, r_max, tol, tol_abs, radial_points)
    res = IntegrationResult(v, e, max(count, 1))
    if (not ok and e > max(tol * abs(v), tol_abs)) or len(failures) > 0:
        raise QuadratureError(
            f"3-D Gaussian quadrature did not converge: {msg or failures[0]}", res
        )
    return res


def angular_gaussian_average(k, c, s):
    """Integral over directions of exp(-(k - c)^2 s^2) for |k| = k, |c| = c.

    Equals 4 pi exp(-(k^2 + c^2) s^2) sinh(2 k c s^2) / (2 k c s^2), written
    in an overflow-free form.
    """
    k = np.asarray(k, dtype=float)
    x = 2.0 * k * c * s * s
    base = np.exp(-((k - c) ** 2) * s * s)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(x > 1e-8, -np.expm1(-2.0 * x) / np.where(x > 0, 2.0 * x, 1.0),
                         1.0 - x)
    out = 4.0 * math.pi * base * ratio
    return float(out) if out.ndim == 0 else out


def integrate_isotropic_gaussian(
    g: Callable[[float], float],
    center_norm: float,
    s: float,
    tol: float = DEFAULT_RTOL,
    tol_abs: float = 0.0,
    points: Sequence[float] | None = None,
) -> IntegrationResult:
    """Integral of g(|k|) exp(-(k - c)^2 s^2) d^3k with |c| = center_norm."""
    c = float(center_norm)
    if c < 0 or not s > 0:
        raise ValueError("need center_norm >= 0 and s > 0")
    lo = max(0.0, c - TAIL / s)
    hi = c + TAIL / s
    pts = [c] + list(points or [])

    def h(k):
        return k * k * g(k) * angular_gaussian_average(k, c, s)

    return integrate_radial(h, lo, hi, tol=tol, tol_abs=tol_abs, points=pts)


def _batch_sizes(samples):
    full, rest = divmod(samples, BATCH)
    return [BATCH] * full + ([rest] if rest else [])


def integrate_constrained_4k(
    g: Callable[..., np.ndarray],
    envelopes: Sequence[Envelope],
    a: float,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    workers: int = 1,
) -> IntegrationResult:
    """Monte-Carlo estimate of

        int d^3k1..d^3k4 g(k1,k2,k3,k4) E1(k1)E2(k2)E3(k3)E4(k4)
            exp(-(k1 - k2)^2 a^2) delta(-k1 + k2 - k3 + k4).

    k4 = k1 - k2 + k3 is fixed by the delta; (k1, k2, k3) are drawn from the
    normalized Gaussian weights of the first three envelopes.  ``g`` receives
    four (n, 3) arrays and returns n real values.  ``error_estimate`` is the
    standard error from the sample variance.

    The stream is a Philox generator split per batch of 65536 samples with
    ``SeedSequence.spawn``; batch sums are combined in batch order, so the
    result depends only on (seed, samples) and not on ``workers``.
    """
    if samples < 100_000:
        raise ValueError("samples must be >= 1e5")
    if len(envelopes) != 4:
        raise ValueError("need four envelopes")
    if a < 0:
        raise ValueError("kernel width a must be >= 0")
    for env in envelopes:
        if not (env.weight.s > 0 and math.isfinite(env.weight.s)):
            raise ValueError("degenerate envelope width")
    e1, e2, e3, e4 = envelopes
    centers = [np.asarray(e.weight.center) for e in envelopes[:3]]
    stds = [1.0 / (math.sqrt(2.0) * e.weight.s) for e in envelopes[:3]]
    # E_i(k) / q_i(k) for the sampled envelopes is the constant amp * norm
    scale = math.prod(e.amplitude * e.weight.norm for e in envelopes[:3])

    sizes = _batch_sizes(int(samples))
    children = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(i):
        rng = np.random.Generator(np.random.Philox(children[i]))
        n = sizes[i]
        ks = [c + sd * rng.standard_normal((n, 3)) for c, sd in zip(centers, stds)]
        k1, k2, k3 = ks
        k4 = k1 - k2 + k3
        d12 = k1 - k2
        w = np.asarray(g(k1, k2, k3, k4), dtype=float)
        w = w * e4(k4) * np.exp(-np.sum(d12 * d12, axis=1) * a * a)
        return np.sum(w), np.sum(w * w), n

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(run, range(len(sizes))))
    else:
        parts = [run(i) for i in range(len(sizes))]
    s1 = np.sum(np.array([p[0] for p in parts]))
    s2 = np.sum(np.array([p[1] for p in parts]))
    n = sum(p[2] for p in parts)
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0) * n / (n - 1)
    return IntegrationResult(scale * mean, scale * math.sqrt(var / n), n)
