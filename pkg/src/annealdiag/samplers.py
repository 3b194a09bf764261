"""Classical baseline samplers behind one request/readset interface:
single-spin-flip Glauber dynamics, continuous-spin O(3) Monte Carlo with
z-projected measurement, and parallel tempering on a geometric ladder.

All samplers are seed-deterministic: every random number is drawn up
front from a PCG64 stream derived from the request seed, and the numba
kernels only consume those arrays. Glauber is the single-replica special
case of the tempering driver, so a 1-replica parallel-tempering run
reproduces a Glauber run read for read.

Temperature convention: beta multiplies the instance energy directly
(k_B = 1, couplings of order 1), so a device-calibrated dimensionless
inverse temperature is used verbatim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .model import IsingInstance, adjacency_csr, energy as instance_energy, validate_spins
from .streams import stream

__all__ = [
    "SamplerRequest",
    "ReadSet",
    "acceptance_probability",
    "glauber_sample",
    "svmc_sample",
    "parallel_tempering_sample",
    "temperature_ladder",
    "prepare_spins",
]

DEFAULT_SWEEPS = 10_000
DEFAULT_SAMPLES = 2_000

_PREPARATIONS = ("all-up", "all-down", "random")


def prepare_spins(n: int, preparation, seed: int = 0, purpose: str = "init") -> np.ndarray:
    """Resolve a named preparation or explicit configuration to spins."""
    if isinstance(preparation, str):
        if preparation == "all-up":
            return np.ones(n, dtype=np.int8)
        if preparation == "all-down":
            return -np.ones(n, dtype=np.int8)
        if preparation == "random":
            rng = stream(seed, purpose)
            return rng.choice(np.array([-1, 1], dtype=np.int8), size=n)
        raise ValueError(f"unknown preparation {preparation!r}; use one of {_PREPARATIONS}")
    return validate_spins(preparation, n)


@dataclass(frozen=True)
class SamplerRequest:
    """One sampler run: instance, temperature, start state, budget, seed."""

    instance: IsingInstance
    beta: float
    initial: object = "all-up"  # named preparation or +-1 array
    sweeps: int = DEFAULT_SWEEPS
    n_samples: int = DEFAULT_SAMPLES
    seed: int = 0
    clamp_environment: bool = False

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.sweeps < 1 or self.n_samples < 1:
            raise ValueError("sweeps and n_samples must be >= 1")

    def initial_spins(self) -> np.ndarray:
        return prepare_spins(self.instance.n, self.initial, self.seed)

    @property
    def spacing(self) -> int:
        return max(1, self.sweeps // self.n_samples)

    def echo(self) -> dict:
        init = self.initial if isinstance(self.initial, str) else [int(s) for s in self.initial]
        return {
            "beta": self.beta,
            "initial": init,
            "sweeps": self.sweeps,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "clamp_environment": self.clamp_environment,
        }


@dataclass(frozen=True)
class ReadSet:
    """Sampled configurations plus provenance."""

    reads: np.ndarray  # (n_samples, n) int8
    sampler: str
    request: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = np.asarray(self.reads, dtype=np.int8)
        if arr.ndim != 2 or not np.all(np.abs(arr) == 1):
            raise ValueError("reads must be a 2-D array of +-1 entries")
        object.__setattr__(self, "reads", arr)

    @property
    def n_reads(self) -> int:
        return self.reads.shape[0]

    def to_replay_dict(self, instance: IsingInstance, preparation: dict | None = None) -> dict:
        """Replay-schema dict, the same format external samplesets use."""
        return {
            "instance": instance.to_dict(),
            "preparation": preparation or {},
            "variables": list(range(instance.n)),
            "reads": self.reads.tolist(),
            "meta": {"sampler": self.sampler, "request": self.request},
        }


def acceptance_probability(beta: float, delta_e: float) -> float:
    """Glauber flip acceptance 1/(1 + e^{beta dE})."""
    x = beta * delta_e
    if x > 700.0:
        return 0.0
    return 1.0 / (1.0 + math.exp(x))


# --- kernels -------------------------------------------------------------


@njit(cache=True)
def _ladder_run(
    spins,  # (R, n) int8, modified in place
    energies,  # (R,) float64, tracked incrementally
    h,
    nbr_ptr,
    nbr_idx,
    nbr_w,
    betas,  # (R,)
    site_orders,  # (rounds, R, width) int64
    uniforms,  # (rounds, R, width)
    swap_uniforms,  # (rounds, R-1)
    equil,
    spacing,
    out,  # (n_samples, n) int8, base-replica samples
):
    rounds = site_orders.shape[0]
    n_rep = spins.shape[0]
    width = site_orders.shape[2]
    t = 0
    for s in range(rounds):
        for r in range(n_rep):
            for k in range(width):
                i = site_orders[s, r, k]
                f = h[i]
                for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
                    f += nbr_w[p] * spins[r, nbr_idx[p]]
                d_e = -2.0 * spins[r, i] * f
                x = betas[r] * d_e
                if x > 700.0:
                    continue
                if uniforms[s, r, k] < 1.0 / (1.0 + math.exp(x)):
                    spins[r, i] = -spins[r, i]
                    energies[r] += d_e
        for pair in range(n_rep - 1):
            logp = (betas[pair] - betas[pair + 1]) * (energies[pair] - energies[pair + 1])
            if logp >= 0.0 or swap_uniforms[s, pair] < math.exp(logp):
                for q in range(spins.shape[1]):
                    tmp = spins[pair, q]
                    spins[pair, q] = spins[pair + 1, q]
                    spins[pair + 1, q] = tmp
                tmp_e = energies[pair]
                energies[pair] = energies[pair + 1]
                energies[pair + 1] = tmp_e
        if s >= equil and (s - equil + 1) % spacing == 0 and t < out.shape[0]:
            out[t] = spins[0]
            t += 1


# The continuous-spin energy couples only the z components,
# H = sum_i h_i n_i^z + sum_(ij) J_ij n_i^z n_j^z - G sum_i n_i^x,
# the semiclassical limit of the pause Hamiltonian: the sz sz coupling
# structure survives, while an isotropic n_i.n_j coupling would add a
# spurious zero-cost global rotation that erases preparation memory.


@njit(cache=True)
def _svmc_run(
    vectors,  # (n, 3) float64, modified in place
    h,
    nbr_ptr,
    nbr_idx,
    nbr_w,
    beta,
    transverse,
    site_orders,  # (rounds, width)
    proposals,  # (rounds, width, 3) unit vectors
    uniforms,  # (rounds, width)
    equil,
    spacing,
    out,  # (n_samples, n) float64 z components at sample times
):
    rounds = site_orders.shape[0]
    width = site_orders.shape[1]
    t = 0
    for s in range(rounds):
        for k in range(width):
            i = site_orders[s, k]
            ux, uy, uz = proposals[s, k, 0], proposals[s, k, 1], proposals[s, k, 2]
            dx = ux - vectors[i, 0]
            dz = uz - vectors[i, 2]
            d_e = h[i] * dz - transverse * dx
            for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
                d_e += nbr_w[p] * dz * vectors[nbr_idx[p], 2]
            x = beta * d_e
            if x <= 0.0 or (x <= 700.0 and uniforms[s, k] < math.exp(-x)):
                vectors[i, 0] = ux
                vectors[i, 1] = uy
                vectors[i, 2] = uz
        if s >= equil and (s - equil + 1) % spacing == 0 and t < out.shape[0]:
            for q in range(vectors.shape[0]):
                out[t, q] = vectors[q, 2]
            t += 1


# --- drivers -------------------------------------------------------------


def _active_sites(req: SamplerRequest) -> np.ndarray:
    if req.clamp_environment:
        return np.asarray(req.instance.subsystem, dtype=np.int64)
    return np.arange(req.instance.n, dtype=np.int64)


def _draw_ladder_randoms(rng, rounds: int, n_rep: int, active: np.ndarray):
    width = len(active)
    orders = rng.permuted(
        np.broadcast_to(active, (rounds, n_rep, width)).copy(), axis=2
    )
    uniforms = rng.random((rounds, n_rep, width))
    swap_uniforms = rng.random((rounds, n_rep - 1))
    return orders, uniforms, swap_uniforms


def _run_ladder(req: SamplerRequest, betas: np.ndarray, label: str, meta: dict) -> ReadSet:
    inst = req.instance
    init = req.initial_spins()
    n_rep = len(betas)
    spins = np.tile(init, (n_rep, 1)).astype(np.int8)
    energies = np.full(n_rep, instance_energy(inst, init), dtype=np.float64)

    active = _active_sites(req)
    rounds = req.sweeps + req.n_samples * req.spacing
    rng = stream(req.seed, "sampler")
    orders, uniforms, swap_uniforms = _draw_ladder_randoms(rng, rounds, n_rep, active)

    ptr, idx, w = adjacency_csr(inst)
    out = np.empty((req.n_samples, inst.n), dtype=np.int8)
    _ladder_run(
        spins,
        energies,
        inst.field_array(),
        ptr,
        idx,
        w,
        np.asarray(betas, dtype=np.float64),
        orders,
        uniforms,
        swap_uniforms,
        req.sweeps,
        req.spacing,
        out,
    )
    return ReadSet(reads=out, sampler=label, request=req.echo() | meta)


def glauber_sample(req: SamplerRequest) -> ReadSet:
    """Single-spin-flip dynamics at fixed temperature.

    Performs ``sweeps`` equilibration sweeps (one proposed flip per
    active site, order random per sweep, acceptance 1/(1+e^{beta dE})),
    then collects ``n_samples`` configurations every
    ``sweeps//n_samples`` sweeps. E spins stay frozen in clamped mode.
    """
    return _run_ladder(req, np.asarray([req.beta]), "glauber", {})


def temperature_ladder(beta: float, n_replicas: int, t_max_ratio: float) -> np.ndarray:
    """Geometric temperatures from T = 1/beta up to t_max_ratio/beta."""
    if n_replicas < 1:
        raise ValueError("need at least one replica")
    if t_max_ratio < 1.0:
        raise ValueError("t_max_ratio must be >= 1")
    if n_replicas == 1:
        return np.asarray([beta])
    steps = np.arange(n_replicas) / (n_replicas - 1)
    return beta / t_max_ratio**steps


def parallel_tempering_sample(
    req: SamplerRequest, n_replicas: int = 20, t_max_ratio: float = 10.0
) -> ReadSet:
    """Replica exchange over a geometric temperature ladder.

    Each round is one Glauber sweep per replica followed by adjacent-pair
    swap proposals accepted with min(1, e^{(b_i - b_j)(E_i - E_j)});
    samples are drawn from the base (device-temperature) replica. Sweep
    accounting is per replica. ``n_replicas=1`` degenerates exactly to
    :func:`glauber_sample`.
    """
    betas = temperature_ladder(req.beta, n_replicas, t_max_ratio)
    meta = {"n_replicas": n_replicas, "t_max_ratio": t_max_ratio, "sweep_accounting": "per-replica"}
    return _run_ladder(req, betas, "pt", meta)


def svmc_sample(
    req: SamplerRequest, transverse_ratio: float = 0.0, projection: str = "sign"
) -> ReadSet:
    """Metropolis dynamics on O(3) unit spins.

    Energy: sum_i h_i n_i^z + sum_(ij) J_ij n_i^z n_j^z, minus an
    optional transverse term ``transverse_ratio * sum_i n_i^x``.
    Proposals draw a fresh uniform direction on the sphere. Measurement
    projects each spin to sign(n_z); ``projection="stochastic"`` instead
    draws +-1 with P(up) = (1 + n_z)/2.
    """
    if projection not in ("sign", "stochastic"):
        raise ValueError("projection must be 'sign' or 'stochastic'")
    inst = req.instance
    init = req.initial_spins()
    vectors = np.zeros((inst.n, 3))
    vectors[:, 2] = init  # classical preparations sit at the +-z poles

    active = _active_sites(req)
    width = len(active)
    rounds = req.sweeps + req.n_samples * req.spacing
    rng = stream(req.seed, "sampler")
    orders = rng.permuted(np.broadcast_to(active, (rounds, width)).copy(), axis=1)
    normals = rng.standard_normal((rounds, width, 3))
    proposals = normals / np.linalg.norm(normals, axis=2, keepdims=True)
    uniforms = rng.random((rounds, width))

    ptr, idx, w = adjacency_csr(inst)
    out = np.empty((req.n_samples, inst.n), dtype=np.float64)
    _svmc_run(
        vectors,
        inst.field_array(),
        ptr,
        idx,
        w,
        req.beta,
        transverse_ratio,
        orders,
        proposals,
        uniforms,
        req.sweeps,
        req.spacing,
        out,
    )
    if projection == "sign":
        reads = np.where(out >= 0.0, 1, -1).astype(np.int8)
    else:
        u = stream(req.seed, "measurement").random(out.shape)
        reads = np.where(u < (1.0 + out) / 2.0, 1, -1).astype(np.int8)
    meta = {"transverse_ratio": transverse_ratio, "projection": projection}
    return ReadSet(reads=reads, sampler="svmc", request=req.echo() | meta)
