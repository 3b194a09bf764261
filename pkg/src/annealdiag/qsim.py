"""Exact quantum simulation of the pause-point dynamics.

The pause Hamiltonian is H = -(A/2) sum_i sx_i + (B/2) H_P with A, B the
schedule scales at the pause fraction, acting on 2^n basis states ordered
by the package bit convention (qubit 0 least significant, bit 0 = spin
+1). Only the pause segment is simulated: states evolve under the fixed
H(s_p) for the pause duration and are read out in the z basis; the ramp
segments of the four-point schedule are not modeled.

Physical pause times in microseconds convert to the dimensionless time
argument of exp(-iHt) via t_nat = 2*pi*1e3 * t_us, which reconciles GHz
energy units with microsecond times at hbar = 1.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg
import scipy.sparse

from .distributions import SubsystemDistribution, config_to_index
from .errors import DegenerateConditionError, IntegrationError, ResourceLimitError
from .model import IsingInstance, validate_spins
from .schedule import ScheduleSpec

__all__ = [
    "NATURAL_TIME_PER_US",
    "MAX_SPARSE_QUBITS",
    "MAX_DENSE_QUBITS",
    "natural_time",
    "build_pause_hamiltonian",
    "basis_state",
    "evolve",
    "z_marginal",
    "quantum_gibbs_diag",
    "conditional_quantum_marginal",
    "unconditional_quantum_marginal",
    "PausePropagator",
    "all_config_energies",
]

NATURAL_TIME_PER_US = 2.0e3 * math.pi
MAX_SPARSE_QUBITS = 14
MAX_DENSE_QUBITS = 12


def natural_time(t_p_us: float) -> float:
    return NATURAL_TIME_PER_US * t_p_us


def all_config_energies(instance: IsingInstance) -> np.ndarray:
    """Classical energies of all configurations, by basis index.

    Direct vectorized evaluation; intentionally a different code path
    from the Gray-code enumeration so the two can cross-check.
    """
    n = instance.n
    idx = np.arange(1 << n, dtype=np.int64)
    spins = 1.0 - 2.0 * ((idx[:, None] >> np.arange(n)) & 1)
    e = spins @ instance.field_array()
    for i, j, J in instance.edges:
        e += J * spins[:, i] * spins[:, j]
    return e


def build_pause_hamiltonian(
    instance: IsingInstance,
    schedule: ScheduleSpec,
    cap: int = MAX_SPARSE_QUBITS,
    energy_scale: float = 1.0,
) -> scipy.sparse.csr_matrix:
    """Sparse 2^n x 2^n pause Hamiltonian (real symmetric).

    Diagonal: (B/2) * energy_scale * classical energy. Off-diagonal: -A/2
    between any two configurations differing in exactly one bit.
    ``energy_scale`` is the programmed problem scale (couplings and
    fields multiplied together, as a hardware auto-scaling factor would);
    it changes the effective transverse-to-coupling ratio without
    touching the schedule.
    """
    n = instance.n
    if n > cap:
        raise ResourceLimitError(f"pause Hamiltonian capped at n <= {cap} qubits")
    if energy_scale <= 0:
        raise ValueError("energy_scale must be positive")
    dim = 1 << n
    diag = 0.5 * schedule.b_ghz * energy_scale * all_config_energies(instance)
    idx = np.arange(dim, dtype=np.int64)
    rows = np.concatenate([idx] * n + [idx])
    cols = np.concatenate([idx ^ (1 << i) for i in range(n)] + [idx])
    data = np.concatenate([np.full(dim * n, -0.5 * schedule.a_ghz), diag])
    H = scipy.sparse.coo_matrix((data, (rows, cols)), shape=(dim, dim)).tocsr()
    H.eliminate_zeros()
    return H


def basis_state(config) -> np.ndarray:
    """Computational basis state |config> as a complex amplitude vector."""
    s = validate_spins(config)
    psi = np.zeros(1 << len(s), dtype=np.complex128)
    psi[config_to_index(s)] = 1.0
    return psi


def _check_normalized(psi: np.ndarray, tol: float = 1e-10) -> None:
    if abs(np.linalg.norm(psi) - 1.0) > tol:
        raise ValueError("state vector is not normalized")


def _lanczos_basis(H, v0, m):
    """Lanczos tridiagonalization with full reorthogonalization.

    Returns (V, alphas, betas, k) where k <= m is the realized dimension
    (early exit on an invariant subspace).
    """
    dim = len(v0)
    V = np.empty((m, dim), dtype=np.complex128)
    alphas = np.zeros(m)
    betas = np.zeros(m)  # betas[j] couples j and j+1
    V[0] = v0
    w = H @ v0
    alphas[0] = np.real(np.vdot(V[0], w))
    w = w - alphas[0] * V[0]
    k = 1
    for j in range(1, m):
        # full reorthogonalization; m is small so this is cheap
        w = w - (V[:j].conj() @ w) @ V[:j]
        b = np.linalg.norm(w)
        if b < 1e-12:
            break
        betas[j - 1] = b
        V[j] = w / b
        w = H @ V[j]
        alphas[j] = np.real(np.vdot(V[j], w))
        w = w - alphas[j] * V[j] - betas[j - 1] * V[j - 1]
        k = j + 1
    return V[:k], alphas[:k], betas[: k - 1], k


def _tridiag_expm_e1(alphas, betas, tau):
    """First column of exp(-1j*tau*T) for the Lanczos tridiagonal T."""
    w, U = scipy.linalg.eigh_tridiagonal(alphas, betas) if len(alphas) > 1 else (
        alphas.copy(),
        np.ones((1, 1)),
    )
    return (U * np.exp(-1j * tau * w)) @ U[0].conj()


def evolve(
    H,
    psi0: np.ndarray,
    t_p_us: float,
    tol: float = 1e-8,
    krylov_dim: int = 40,
) -> np.ndarray:
    """exp(-i H t_nat) psi0 by Krylov (Lanczos) restarts with adaptive
    substepping; t_nat = 2*pi*1e3 * t_p_us.

    The local step error is estimated from the trailing Krylov
    coefficient and the step is shrunk until it meets ``tol``;
    deterministic, norm drift is checked against 1e-8.
    """
    _check_normalized(psi0)
    remaining = natural_time(t_p_us)
    if remaining == 0.0:
        return psi0.copy()
    psi = psi0.astype(np.complex128)
    # spectral width estimate from Gershgorin for an initial step guess
    width = float(np.abs(H).sum(axis=1).max())
    tau = min(remaining, 2.0 * krylov_dim / max(width, 1e-30))
    while remaining > 0:
        tau = min(tau, remaining)
        nrm = np.linalg.norm(psi)
        V, alphas, betas, k = _lanczos_basis(H, psi / nrm, krylov_dim)
        if k < krylov_dim:
            # invariant subspace: step is exact for any tau
            coeff = _tridiag_expm_e1(alphas, betas, remaining)
            psi = nrm * (coeff @ V)
            break
        while True:
            coeff = _tridiag_expm_e1(alphas, betas, tau)
            err = abs(coeff[-1])
            if err <= tol or tau <= 1e-14 * remaining:
                break
            tau *= 0.5
        psi = nrm * (coeff @ V)
        remaining -= tau
        if err < 0.1 * tol:
            tau *= 1.5
    drift = abs(np.linalg.norm(psi) - 1.0)
    if drift > 1e-8:
        raise IntegrationError(f"norm drift {drift:.2e} exceeds 1e-8")
    return psi


def z_marginal(psi: np.ndarray, subsystem) -> SubsystemDistribution:
    """Subsystem readout distribution: environment amplitudes traced out."""
    return _project_probs(np.abs(psi) ** 2, subsystem)


def _project_probs(probs: np.ndarray, subsystem) -> SubsystemDistribution:
    n = int(np.log2(len(probs)))
    subsystem = tuple(sorted(subsystem))
    if subsystem and not 0 <= subsystem[0] <= subsystem[-1] < n:
        raise ValueError("subsystem indices out of range")
    idx = np.arange(len(probs), dtype=np.int64)
    local = np.zeros(len(probs), dtype=np.int64)
    for k, q in enumerate(subsystem):
        local |= ((idx >> q) & 1) << k
    out = np.bincount(local, weights=probs, minlength=1 << len(subsystem))
    total = out.sum()
    return SubsystemDistribution(probs=out / total, subsystem=subsystem, n_reads=0)


def quantum_gibbs_diag(H, beta: float, cap: int = MAX_DENSE_QUBITS) -> np.ndarray:
    """z-basis diagonal of exp(-beta H)/Tr exp(-beta H), by full dense
    eigendecomposition (real symmetric H)."""
    dim = H.shape[0]
    if dim > 1 << cap:
        raise ResourceLimitError(f"Gibbs diagonal capped at n <= {cap} qubits")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    dense = H.toarray() if scipy.sparse.issparse(H) else np.asarray(H)
    w, V = np.linalg.eigh(dense)
    weights = np.exp(-beta * (w - w.min()))
    diag = (V**2) @ weights
    return diag / diag.sum()


def _split_env_mask(n: int, subsystem, sigma_e) -> np.ndarray:
    subsystem = tuple(sorted(subsystem))
    env = [q for q in range(n) if q not in set(subsystem)]
    sigma_e = validate_spins(sigma_e, len(env))
    idx = np.arange(1 << n, dtype=np.int64)
    mask = np.ones(1 << n, dtype=bool)
    for q, s in zip(env, sigma_e):
        mask &= (((idx >> q) & 1) == (1 if s < 0 else 0))
    return mask


def conditional_quantum_marginal(diag: np.ndarray, subsystem, sigma_e) -> SubsystemDistribution:
    """Restrict a z-basis probability vector to basis states whose
    environment matches ``sigma_e`` (ordered by ascending environment
    qubit index) and renormalize."""
    n = int(np.log2(len(diag)))
    mask = _split_env_mask(n, subsystem, sigma_e)
    sliced = np.where(mask, diag, 0.0)
    total = sliced.sum()
    if total <= 0.0:
        raise DegenerateConditionError("conditional slice has zero probability weight")
    return _project_probs(sliced / total, subsystem)


def unconditional_quantum_marginal(diag: np.ndarray, subsystem) -> SubsystemDistribution:
    """Trace a z-basis probability vector over all environment configurations."""
    return _project_probs(np.asarray(diag, dtype=np.float64), subsystem)


class PausePropagator:
    """Evolution engine for one (instance, schedule) pair.

    For n up to ``MAX_DENSE_QUBITS`` the full eigendecomposition is
    computed once (it is needed for the Gibbs diagnostics anyway) and
    every subsequent evolution is two dense matrix-vector products;
    beyond that, evolutions fall back to the Krylov propagator.
    """

    def __init__(
        self,
        instance: IsingInstance,
        schedule: ScheduleSpec,
        method: str = "auto",
        energy_scale: float = 1.0,
    ):
        self.instance = instance
        self.schedule = schedule
        self.energy_scale = energy_scale
        self.hamiltonian = build_pause_hamiltonian(instance, schedule, energy_scale=energy_scale)
        if method == "auto":
            method = "eigh" if instance.n <= MAX_DENSE_QUBITS else "krylov"
        if method not in ("eigh", "krylov"):
            raise ValueError(f"unknown method {method!r}")
        self.method = method
        self._eig = None
        if method == "eigh":
            if instance.n > MAX_DENSE_QUBITS:
                raise ResourceLimitError(f"dense propagation capped at n <= {MAX_DENSE_QUBITS}")
            self._eig = np.linalg.eigh(self.hamiltonian.toarray())

    def evolve_state(self, psi0: np.ndarray, t_p_us: float) -> np.ndarray:
        _check_normalized(psi0)
        if self.method == "krylov":
            return evolve(self.hamiltonian, psi0, t_p_us)
        w, V = self._eig
        phases = np.exp(-1j * natural_time(t_p_us) * w)
        return V @ (phases * (V.T @ psi0))

    def evolve_config(self, config, t_p_us: float) -> np.ndarray:
        if self.method == "krylov":
            return evolve(self.hamiltonian, basis_state(config), t_p_us)
        w, V = self._eig
        z = config_to_index(validate_spins(config, self.instance.n))
        phases = np.exp(-1j * natural_time(t_p_us) * w)
        return V @ (phases * V[z])

    def gibbs_diag(self, beta: float) -> np.ndarray:
        if self._eig is None:
            return quantum_gibbs_diag(self.hamiltonian, beta)
        w, V = self._eig
        weights = np.exp(-beta * (w - w.min()))
        diag = (V**2) @ weights
        return diag / diag.sum()
