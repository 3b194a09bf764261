"""Probability distributions over spin configurations, and the basis
conventions that keep every backend consistent.

Basis convention (asserted throughout): configurations map to integer
indices with qubit 0 as the least significant bit and bit value 0 for
spin +1. A subsystem distribution over qubits ``(q_0 < q_1 < ...)`` uses
the same rule on local bits, bit k belonging to q_k.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SubsystemDistribution",
    "config_to_index",
    "index_to_config",
    "subsystem_indices",
    "empirical_subsystem_distribution",
    "pool",
]

PROB_SUM_TOL = 1e-9


def config_to_index(config) -> int:
    """Basis index of a +-1 configuration (bit i = qubit i, 0 means +1)."""
    bits = (np.asarray(config) < 0).astype(np.int64)
    return int(bits @ (1 << np.arange(len(bits), dtype=np.int64)))


def index_to_config(index: int, n: int) -> np.ndarray:
    """Inverse of :func:`config_to_index`."""
    bits = (index >> np.arange(n)) & 1
    return (1 - 2 * bits).astype(np.int8)


def subsystem_indices(reads: np.ndarray, subsystem) -> np.ndarray:
    """Local subsystem index for each row of an (n_reads, n) +-1 array."""
    sub = np.asarray(reads)[:, list(subsystem)]
    bits = (sub < 0).astype(np.int64)
    return bits @ (1 << np.arange(bits.shape[1], dtype=np.int64))


@dataclass(frozen=True)
class SubsystemDistribution:
    """Normalized distribution over the 2^|S| subsystem configurations.

    ``n_reads`` is 0 for exact (enumerated or state-vector) distributions.
    ``subsystem`` records the qubit order the local bits refer to.
    """

    probs: np.ndarray
    subsystem: tuple[int, ...]
    n_reads: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "probs", p)
        k = len(self.subsystem)
        if p.shape != (2**k,):
            raise ValueError(f"expected {2**k} probabilities for |S|={k}, got {p.shape}")
        if np.any(p < -PROB_SUM_TOL):
            raise ValueError("probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {p.sum():.12f}, not 1")
        if self.n_reads < 0:
            raise ValueError("n_reads must be >= 0")

    @property
    def support_size(self) -> int:
        return len(self.probs)

    def to_dict(self) -> dict:
        return {
            "probs": [float(x) for x in self.probs],
            "subsystem": list(self.subsystem),
            "n_reads": int(self.n_reads),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SubsystemDistribution":
        return cls(
            probs=np.asarray(d["probs"], dtype=np.float64),
            subsystem=tuple(int(v) for v in d["subsystem"]),
            n_reads=int(d["n_reads"]),
        )


def empirical_subsystem_distribution(reads: np.ndarray, subsystem) -> SubsystemDistribution:
    """Raw empirical frequencies of subsystem strings (no smoothing)."""
    reads = np.asarray(reads)
    if reads.ndim != 2:
        raise ValueError("reads must be a 2-D (n_reads, n) array")
    idx = subsystem_indices(reads, subsystem)
    k = len(subsystem)
    counts = np.bincount(idx, minlength=2**k).astype(np.float64)
    if counts.sum() == 0:
        raise ValueError("empty read set")
    return SubsystemDistribution(
        probs=counts / counts.sum(), subsystem=tuple(subsystem), n_reads=len(idx)
    )


def pool(dists: list[SubsystemDistribution]) -> SubsystemDistribution:
    """Pooled distribution: read-count weighted for empirical inputs,
    equal-weight average when all inputs are exact (n_reads = 0)."""
    if not dists:
        raise ValueError("nothing to pool")
    sub = dists[0].subsystem
    for d in dists:
        if d.subsystem != sub:
            raise ValueError("cannot pool distributions over different subsystems")
    weights = np.asarray([d.n_reads for d in dists], dtype=np.float64)
    if weights.sum() == 0:
        weights = np.ones(len(dists))
    probs = sum(w * d.probs for w, d in zip(weights, dists)) / weights.sum()
    return SubsystemDistribution(probs=probs, subsystem=sub, n_reads=int(sum(d.n_reads for d in dists)))
