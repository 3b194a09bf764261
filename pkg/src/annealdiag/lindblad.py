"""Open-system pause dynamics: a Lindblad channel with thermal jump
operators built in the eigenbasis of the pause Hamiltonian.

For each qubit the spin-flip coupling sigma_x decomposes over eigenstate
pairs (a, b) into jump operators sqrt(rate)|a><b| whose rates obey
detailed balance at the target inverse temperature: downhill transitions
proceed at gamma * |<a|sx_i|b>|^2, uphill ones carry the extra factor
exp(-beta dE). With these (secular) operators the dissipator is
time-independent in the interaction picture of the eigenbasis, where a
fixed-step 4th-order Runge-Kutta integration is stable at step sizes set
by the jump rates rather than by the Hamiltonian phases.

Populations relax toward the Gibbs state of the full pause Hamiltonian;
the gamma = 0 limit is exactly unitary evolution.
"""

from __future__ import annotations

import numpy as np

from .errors import IntegrationError, ResourceLimitError
from .model import IsingInstance
from .qsim import build_pause_hamiltonian, natural_time
from .schedule import ScheduleSpec

__all__ = ["MAX_LINDBLAD_QUBITS", "lindblad_evolve", "LindbladChannel"]

MAX_LINDBLAD_QUBITS = 8

TRACE_TOL = 1e-6
POSITIVITY_TOL = 1e-6


def _sigma_x_eigenbasis(n: int, V: np.ndarray) -> list[np.ndarray]:
    """V^T sx_i V for every qubit i, computed via index bit flips."""
    idx = np.arange(1 << n)
    mats = []
    for i in range(n):
        flipped = V[idx ^ (1 << i), :]
        mats.append(V.T @ flipped)
    return mats


class LindbladChannel:
    """Reusable channel for one (instance, schedule, beta, gamma) tuple."""

    def __init__(
        self,
        instance: IsingInstance,
        schedule: ScheduleSpec,
        beta: float,
        gamma: float,
        energy_scale: float = 1.0,
    ):
        if instance.n > MAX_LINDBLAD_QUBITS:
            raise ResourceLimitError(f"Lindblad backend capped at n <= {MAX_LINDBLAD_QUBITS}")
        if gamma < 0:
            raise ValueError("gamma must be >= 0")
        self.instance = instance
        self.beta = beta
        self.gamma = gamma
        H = build_pause_hamiltonian(instance, schedule, energy_scale=energy_scale).toarray()
        self.energies, self.vectors = np.linalg.eigh(H)
        dim = len(self.energies)
        self.rates = np.zeros((dim, dim))
        if gamma > 0:
            dE = self.energies[None, :] - self.energies[:, None]  # E_b - E_a: >0 downhill
            balance = np.exp(beta * np.minimum(dE, 0.0))  # 1 downhill, e^{-beta|dE|} uphill
            for X in _sigma_x_eigenbasis(instance.n, self.vectors):
                self.rates += gamma * balance * X**2
        self.out_rates = self.rates.sum(axis=0)

    def evolve(self, rho0: np.ndarray, t_p_us: float, n_steps: int = 4000) -> np.ndarray:
        """Evolve a density matrix (z basis) for the pause duration.

        ``rho0`` may be a ket; it is promoted to a projector. Raises
        IntegrationError when the step size is too coarse for the rates
        or when trace/positivity drift beyond 1e-6.
        """
        rho0 = np.asarray(rho0, dtype=np.complex128)
        dim = len(self.energies)
        if rho0.ndim == 1:
            rho0 = np.outer(rho0, rho0.conj())
        if rho0.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} density matrix")
        t = natural_time(t_p_us)
        V = self.vectors
        rho = V.T @ rho0 @ V  # eigenbasis, interaction picture at t=0

        if self.gamma > 0 and t > 0:
            dt = t / n_steps
            max_rate = float(self.out_rates.max())
            if dt * max_rate > 0.5:
                raise IntegrationError(
                    f"step {dt:.3g} too coarse for jump rates (dt*rate = {dt * max_rate:.3g}); "
                    "increase n_steps"
                )
            W = self.rates
            decay = 0.5 * (self.out_rates[:, None] + self.out_rates[None, :])
            didx = np.diag_indices(dim)

            def rhs(r):
                out = -decay * r
                out[didx] += W @ r[didx]
                return out

            for _ in range(n_steps):
                k1 = rhs(rho)
                k2 = rhs(rho + 0.5 * dt * k1)
                k3 = rhs(rho + 0.5 * dt * k2)
                k4 = rhs(rho + dt * k3)
                rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

        phases = np.exp(-1j * t * self.energies)
        rho = (phases[:, None] * rho) * phases.conj()[None, :]
        rho = V @ rho @ V.T

        drift = abs(np.trace(rho).real - 1.0)
        if drift > TRACE_TOL:
            raise IntegrationError(f"trace drift {drift:.2e} exceeds {TRACE_TOL}")
        if np.linalg.eigvalsh(rho).min() < -POSITIVITY_TOL:
            raise IntegrationError("density matrix lost positivity")
        return rho


def lindblad_evolve(
    instance: IsingInstance,
    schedule: ScheduleSpec,
    rho0: np.ndarray,
    beta: float,
    gamma: float,
    t_p_us: float,
    n_steps: int = 4000,
) -> np.ndarray:
    """One-shot wrapper around :class:`LindbladChannel`."""
    return LindbladChannel(instance, schedule, beta, gamma).evolve(rho0, t_p_us, n_steps)
