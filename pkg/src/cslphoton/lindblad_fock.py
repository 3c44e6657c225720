"""Direct integration of the collapse master equation on a few box modes.

Modes carry box momenta k_m = (2 pi / L) n_m with integer vectors n_m.  The
energy-density dissipator becomes a sum over momentum transfers q,

    L(rho) = -i[H, rho] - (c0/2) sum_q w_q [A_q, [A_q^dag, rho]],
    A_q = sum_{k_m - k_n = q} sqrt(w_m w_n) a_m^dag a_n,   w_q = exp(-q^2 a^2),

with c0 = (lambda / M_N^2)(a^2/pi)^(3/2)(2 pi / L)^3 and one field species.
Each A_q conserves total photon number, so trace and number are invariants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import expm_multiply

from .units import CollapseParams, omega

MAX_MODES = 6
MAX_DIM = 4096
EXACT_DIM = 256             # sparse exact exponentiation at or below this D
TOP_LAYER_LIMIT = 1e-6
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-8
POSITIVITY_TOL = 1e-8


class FockInvariantError(RuntimeError):
    pass


@dataclass(frozen=True)
class ModeGrid:
    """Box modes with integer momentum labels ``n`` (K x 3), box side ``L`` (cm)
    and mass ``M`` (cm^-1).  ``energies`` overrides w(k) when given."""

    n: np.ndarray
    L: float
    M: float = 0.0
    energies: np.ndarray | None = None

    def __post_init__(self):
        n = np.atleast_2d(np.asarray(self.n, dtype=int))
        if n.shape[1] != 3:
            raise ValueError("mode labels must be integer 3-vectors")
        if not 1 <= len(n) <= MAX_MODES:
            raise ValueError(f"need 1..{MAX_MODES} modes, got {len(n)}")
        if len({tuple(r) for r in n}) != len(n):
            raise ValueError("mode momenta must be distinct")
        if not self.L > 0 or self.M < 0:
            raise ValueError("need L > 0 and M >= 0")
        object.__setattr__(self, "n", n)
        if self.energies is not None:
            e = np.asarray(self.energies, dtype=float)
            if e.shape != (len(n),) or np.any(e < 0):
                raise ValueError("energies must be K non-negative values")
            object.__setattr__(self, "energies", e)

    @property
    def K(self) -> int:
        return len(self.n)

    @property
    def momenta(self) -> np.ndarray:
        return (2.0 * math.pi / self.L) * self.n

    @property
    def omega(self) -> np.ndarray:
        if self.energies is not None:
            return self.energies
        return np.asarray(omega(np.linalg.norm(self.momenta, axis=1), self.M), dtype=float)

    def with_energies(self, energies) -> "ModeGrid":
        return ModeGrid(self.n, self.L, self.M, energies)


def _ladder(nmax):
    return np.diag(np.sqrt(np.arange(1, nmax + 1, dtype=float)), 1)


def _embed(op, m, K, d):
    out = sparse.identity(1, format="csr")
    eye = sparse.identity(d, format="csr")
    for j in range(K):
        out = sparse.kron(out, sparse.csr_matrix(op) if j == m else eye, format="csr")
    return out


@dataclass
class FockModel:
    """Truncated Fock space of ``grid`` with at most ``nmax`` photons per mode."""

    grid: ModeGrid
    c0: float
    a: float
    nmax: int = 3
    H: np.ndarray = field(init=False, repr=False)
    jumps: list = field(init=False, repr=False)

    def __post_init__(self):
        if self.nmax < 1:
            raise ValueError("nmax must be >= 1")
        if self.c0 < 0 or not self.a > 0:
            raise ValueError("need c0 >= 0 and a > 0")
        if self.dim > MAX_DIM:
            raise ValueError(f"dimension {self.dim} exceeds {MAX_DIM}")
        K, d = self.grid.K, self.nmax + 1
        a1 = _ladder(self.nmax)
        self._a = [_embed(a1, m, K, d) for m in range(K)]
        # occupations of each basis state, exact integers (row-major digits)
        occ = np.indices((d,) * K).reshape(K, -1)
        self._n = [sparse.diags(occ[m].astype(float), format="csr") for m in range(K)]
        w = self.grid.omega
        self.H = np.real(sum(w[m] * self._n[m] for m in range(K)).diagonal())

        # group mode pairs by integer momentum transfer
        groups = {}
        for m in range(K):
            for n in range(K):
                q = tuple(self.grid.n[m] - self.grid.n[n])
                groups.setdefault(q, []).append((m, n))
        dk = 2.0 * math.pi / self.grid.L
        self.jumps = []
        for q, pairs in sorted(groups.items()):
            A = sum(math.sqrt(w[m] * w[n]) * (self._a[m].T @ self._a[n]) for m, n in pairs)
            wq = math.exp(-(dk * dk) * float(np.dot(q, q)) * self.a * self.a)
            self.jumps.append((q, wq, sparse.csr_matrix(A)))
        self.Gamma = sparse.csr_matrix(sum(wq * (A @ A.T) for _, wq, A in self.jumps))

    @classmethod
    def from_params(cls, grid: ModeGrid, params: CollapseParams, nmax: int = 3):
        c0 = (params.lambda_rate * params.lambda_bar_N**2 * (params.a**2 / math.pi) ** 1.5
              * (2.0 * math.pi / grid.L) ** 3)
        return cls(grid, c0, params.a, nmax)

    @property
    def dim(self) -> int:
        return (self.nmax + 1) ** self.grid.K

    @property
    def kernel(self) -> np.ndarray:
        """G(m, n) = sqrt(w_m w_n) exp(-(k_m - k_n)^2 a^2)."""
        w = self.grid.omega
        k = self.grid.momenta
        d2 = np.sum((k[:, None, :] - k[None, :, :]) ** 2, axis=-1)
        return np.sqrt(np.outer(w, w)) * np.exp(-d2 * self.a * self.a)

    @property
    def weights(self) -> np.ndarray:
        """exp(-(k_m - k_n)^2 a^2)."""
        k = self.grid.momenta
        d2 = np.sum((k[:, None, :] - k[None, :, :]) ** 2, axis=-1)
        return np.exp(-d2 * self.a * self.a)

    def number_ops(self):
        return [x.diagonal().real for x in self._n]

    def basis_index(self, occupations) -> int:
        d = self.nmax + 1
        idx = 0
        for n in occupations:
            if not 0 <= n <= self.nmax:
                raise ValueError(f"occupation {n} outside 0..{self.nmax}")
            idx = idx * d + int(n)
        return idx

    def norm_estimate(self) -> float:
        """Upper bound on the generator's norm (spectral-radius scale)."""
        spread = float(self.H.max() - self.H.min())
        # Gamma is positive semidefinite; its largest row sum bounds its norm
        gam = float(abs(self.Gamma).sum(axis=1).max()) if self.c0 > 0 else 0.0
        return spread + 2.0 * self.c0 * gam


def build_generator(model: FockModel):
    """The generator as a function rho -> L(rho) on dense D x D matrices
    (operators stay sparse)."""
    H = model.H
    c0 = model.c0
    Gam = model.Gamma
    jumps = [(wq, A) for _, wq, A in model.jumps]

    def apply(rho):
        out = -1j * (H[:, None] * rho - rho * H[None, :])
        if c0 > 0:
            # Gamma and A are real; rho Gamma = (Gamma rho^T)^T, A rho A^T = (A (A rho)^T)^T
            diss = Gam @ rho + (Gam @ rho.T).T
            for wq, A in jumps:
                diss -= 2.0 * wq * (A @ (A @ rho).T).T
            out -= 0.5 * c0 * diss
        return out

    return apply


def build_superoperator(model: FockModel) -> sparse.csr_matrix:
    """Sparse D^2 x D^2 matrix of the generator on row-major vec(rho)."""
    D = model.dim
    I = sparse.identity(D, format="csr")
    Hs = sparse.diags(model.H)
    S = -1j * (sparse.kron(Hs, I) - sparse.kron(I, Hs))
    if model.c0 > 0:
        G = sparse.csr_matrix(model.Gamma)
        diss = sparse.kron(G, I) + sparse.kron(I, G.T)
        for _, wq, A in model.jumps:
            diss = diss - 2.0 * wq * sparse.kron(A, A)     # A rho A^T, A real
        S = S - 0.5 * model.c0 * diss
    return sparse.csr_matrix(S)


@dataclass
class DensityState:
    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("rho must be square")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(rho))):
            raise ValueError("rho must be Hermitian")
        self.rho = rho

    @property
    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    def normalized(self) -> "DensityState":
        return DensityState(self.rho / self.trace)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.rho).min())


def _product(factors):
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def thermal_state(model: FockModel, beta: float) -> DensityState:
    """Product of truncated, renormalized thermal states exp(-beta w n)."""
    if not beta > 0:
        raise ValueError("beta must be > 0")
    n = np.arange(model.nmax + 1)
    factors = []
    for w in model.grid.omega:
        p = np.exp(-beta * w * n)
        factors.append(np.diag(p / p.sum()))
    return DensityState(_product(factors))


def truncated_thermal_occupancy(beta, w, nmax):
    """Occupancy of the truncated thermal state; -> 1/(e^{beta w} - 1) as nmax grows."""
    n = np.arange(nmax + 1)
    p = np.exp(-beta * w * n)
    return float((n * p).sum() / p.sum())


def number_state(model: FockModel, occupations) -> DensityState:
    psi = np.zeros(model.dim, dtype=complex)
    psi[model.basis_index(occupations)] = 1.0
    return DensityState(np.outer(psi, psi.conj()))


def superposition_state(model: FockModel, occ_a, occ_b) -> DensityState:
    """(|occ_a> + |occ_b>) / sqrt(2) as a density matrix."""
    psi = np.zeros(model.dim, dtype=complex)
    psi[model.basis_index(occ_a)] += 1.0
    psi[model.basis_index(occ_b)] += 1.0
    psi /= np.linalg.norm(psi)
    return DensityState(np.outer(psi, psi.conj()))


def coherent_state(model: FockModel, alphas) -> DensityState:
    """Product of truncated, renormalized coherent states."""
    alphas = np.asarray(alphas, dtype=complex)
    if alphas.shape != (model.grid.K,):
        raise ValueError("need one amplitude per mode")
    n = np.arange(model.nmax + 1)
    fact = np.array([math.factorial(int(j)) for j in n], dtype=float)
    psi = np.ones(1, dtype=complex)
    for al in alphas:
        v = al**n / np.sqrt(fact)
        psi = np.kron(psi, v / np.linalg.norm(v))
    return DensityState(np.outer(psi, psi.conj()))


@dataclass(frozen=True)
class Observables:
    trace: float
    number: float
    energy: float
    occupancy: np.ndarray
    top_layer: float            # probability of any mode at nmax
    coherences: dict = field(default_factory=dict)


def observables(state: DensityState, model: FockModel, pairs=()) -> Observables:
    """Expectations from the diagonal; ``pairs`` of basis-index tuples give
    the coherence magnitudes |rho_ij| to report."""
    diag = np.real(np.diag(state.rho))
    ns = model.number_ops()
    occ = np.array([float(diag @ n) for n in ns])
    top = np.zeros(model.dim, dtype=bool)
    for n in ns:
        top |= n == model.nmax
    coh = {tuple(p): float(abs(state.rho[p[0], p[1]])) for p in pairs}
    return Observables(
        trace=float(diag.sum()),
        number=float(occ.sum()),
        energy=float(diag @ model.H),
        occupancy=occ,
        top_layer=float(diag[top].sum()),
        coherences=coh,
    )


def _assert_invariants(rho, trace0, where):
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if herm > HERMITIAN_TOL:
        raise FockInvariantError(f"{where}: Hermiticity violated by {herm:.3g}")
    tr = float(np.trace(rho).real)
    if abs(tr - trace0) > TRACE_TOL:
        raise FockInvariantError(f"{where}: trace drifted by {tr - trace0:.3g}")


def default_steps(model: FockModel, t: float) -> int:
    return max(10, int(math.ceil(10.0 * model.norm_estimate() * abs(t))))


def evolve(state: DensityState, model: FockModel, t: float, steps: int | None = None,
           method: str = "auto", check_positivity: bool = True) -> DensityState:
    """rho(t) by RK4 (``method="rk4"``) or sparse exact exponentiation
    (``"exact"``); ``"auto"`` picks exact for D <= 256."""
    if t < 0:
        raise ValueError("t must be >= 0")
    D = model.dim
    if state.rho.shape != (D, D):
        raise ValueError("state dimension does not match the model")
    if method == "auto":
        method = "exact" if D <= EXACT_DIM else "rk4"
    rho = state.rho.copy()
    trace0 = float(np.trace(rho).real)
    if t == 0:
        return DensityState(rho)
    if method == "exact":
        S = build_superoperator(model)
        rho = expm_multiply(S * t, rho.reshape(-1)).reshape(D, D)
    elif method == "rk4":
        steps = steps or default_steps(model, t)
        h = t / steps
        if h * model.norm_estimate() > 0.1:
            raise ValueError(f"step too large: h*|L| = {h * model.norm_estimate():.3g} > 0.1")
        L = build_generator(model)
        for _ in range(steps):
            k1 = L(rho)
            k2 = L(rho + 0.5 * h * k1)
            k3 = L(rho + 0.5 * h * k2)
            k4 = L(rho + h * k3)
            rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    else:
        raise ValueError(f"unknown method {method!r}")
    _assert_invariants(rho, trace0, f"evolve({method})")
    rho = 0.5 * (rho + rho.conj().T)
    out = DensityState(rho)
    if check_positivity and out.min_eigenvalue() < -POSITIVITY_TOL:
        raise FockInvariantError(f"negative eigenvalue {out.min_eigenvalue():.3g}")
    return out


@dataclass
class TimeSeries:
    t: np.ndarray
    trace: np.ndarray
    number: np.ndarray
    energy: np.ndarray
    coherences: dict
    truncation_flag: bool


def evolve_series(state: DensityState, model: FockModel, times, pairs=(),
                  method: str = "auto") -> TimeSeries:
    """Observables at increasing ``times`` (first may be 0), stepping between them."""
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or times[0] < 0:
        raise ValueError("times must be non-negative and increasing")
    obs, cur, t_prev = [], state, 0.0
    for t in times:
        cur = evolve(cur, model, t - t_prev, method=method)
        t_prev = t
        obs.append(observables(cur, model, pairs))
    coh = {p: np.array([o.coherences[tuple(p)] for o in obs]) for p in map(tuple, pairs)}
    return TimeSeries(
        t=times,
        trace=np.array([o.trace for o in obs]),
        number=np.array([o.number for o in obs]),
        energy=np.array([o.energy for o in obs]),
        coherences=coh,
        truncation_flag=any(o.top_layer >= TOP_LAYER_LIMIT for o in obs),
    )


# -- first-order analytics -------------------------------------------------------

def number_rates(model: FockModel, occupancy) -> np.ndarray:
    """d<n_s>/dt = -c0 w_s sum_n w_n e^{-(k_s-k_n)^2 a^2} (n_s - n_n), for states
    without inter-mode coherence, away from truncation."""
    occ = np.asarray(occupancy, dtype=float)
    w = model.grid.omega
    G = model.weights
    return -model.c0 * w * ((G * w[None, :]) @ np.ones_like(occ) * occ - (G * w[None, :]) @ occ)


def energy_rate(model: FockModel, occupancy) -> float:
    """d<H>/dt = c0 sum_{m,n} <n_m> w_m w_n (w_n - w_m) e^{-(k_m-k_n)^2 a^2}."""
    occ = np.asarray(occupancy, dtype=float)
    w = model.grid.omega
    G = model.weights
    return float(model.c0 * np.sum(occ[:, None] * w[:, None] * w[None, :]
                                   * (w[None, :] - w[:, None]) * G))


def generator_rates(state: DensityState, model: FockModel):
    """Exact instantaneous (d<n_m>/dt, d<H>/dt) from one generator application."""
    drho = build_generator(model)(state.rho)
    diag = np.real(np.diag(drho))
    return np.array([float(diag @ n) for n in model.number_ops()]), float(diag @ model.H)


def coherence_decay_rate(model: FockModel, occ_a, occ_b, t: float) -> float:
    """-d ln|rho_ab|/dt averaged over [0, t] for the superposition of two
    number states."""
    st = superposition_state(model, occ_a, occ_b)
    i, j = model.basis_index(occ_a), model.basis_index(occ_b)
    out = evolve(st, model, t)
    return -math.log(abs(out.rho[i, j]) / abs(st.rho[i, j])) / t
