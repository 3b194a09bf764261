"""The two-observable validation protocol.

Memory side: the order parameter M is the maximum pairwise total
variation distance between subsystem readout distributions obtained from
different initial preparations; M near 0 means the readout forgot its
preparation, M = 1 means complete retention. Bootstrap errors come from
resampling raw reads with replacement.

Thermal side: the distance D_TV of a measured subsystem distribution to
a conditional Gibbs reference (environment clamped to its prepared
state, inverse temperature calibrated from single-qubit probes) flags
relaxed-but-trapped readouts that the memory criterion alone misses. The
reference is a discrepancy detector, not a thermometer: for
near-deterministic readouts the distance barely depends on the reference
temperature, which the sensitivity sweep makes explicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import SubsystemDistribution
from .errors import DegenerateProbeError
from .model import IsingInstance, validate_spins
from .streams import stream

__all__ = [
    "MemoryResult",
    "ThermalComparison",
    "tvd",
    "memory_order_parameter",
    "estimate_beta_eff",
    "gibbs_vector",
    "conditional_gibbs_reference",
    "sampling_floor",
    "classify",
    "beta_sensitivity_sweep",
    "arrhenius_factor",
    "M_THRESHOLD",
    "D_THRESHOLD",
]

M_THRESHOLD = 0.05
D_THRESHOLD = 0.05

DEFAULT_RESAMPLES = 200

CLASSES = (
    "relaxed-thermal",
    "relaxed-trapped",
    "memory-retaining",
    "memory-retaining-aliased",
)


def tvd(p: SubsystemDistribution | np.ndarray, q: SubsystemDistribution | np.ndarray) -> float:
    """Total variation distance (1/2) sum |P - Q|, in [0, 1]."""
    pa = p.probs if isinstance(p, SubsystemDistribution) else np.asarray(p, dtype=np.float64)
    qa = q.probs if isinstance(q, SubsystemDistribution) else np.asarray(q, dtype=np.float64)
    if pa.shape != qa.shape:
        raise ValueError(f"support mismatch: {pa.shape} vs {qa.shape}")
    return float(0.5 * np.abs(pa - qa).sum())


@dataclass(frozen=True)
class MemoryResult:
    """Memory order parameter with pairwise distances and bootstrap error."""

    m: float
    pairwise: dict[tuple[int, int], float]
    bootstrap_std: float | None = None
    n_resamples: int = 0

    def to_dict(self) -> dict:
        return {
            "M": self.m,
            "pairwise": {f"{a}-{b}": v for (a, b), v in self.pairwise.items()},
            "bootstrap_std": self.bootstrap_std,
            "n_resamples": self.n_resamples,
        }


def _max_pairwise(dists: list[np.ndarray]) -> tuple[float, dict]:
    pairwise = {}
    m = 0.0
    for a in range(len(dists)):
        for b in range(a + 1, len(dists)):
            d = float(0.5 * np.abs(dists[a] - dists[b]).sum())
            pairwise[(a, b)] = d
            m = max(m, d)
    return m, pairwise


def memory_order_parameter(
    dists: list[SubsystemDistribution],
    raw_reads: list[np.ndarray] | None = None,
    n_resamples: int = DEFAULT_RESAMPLES,
    seed: int = 0,
) -> MemoryResult:
    """Max pairwise TVD across preparations, with optional bootstrap error.

    ``raw_reads`` gives, per preparation, the subsystem basis index of
    every read; resampling them with replacement ``n_resamples`` times
    yields the bootstrap standard deviation of M.
    """
    if len(dists) < 2:
        raise ValueError("need at least two distributions")
    k = dists[0].support_size
    for d in dists[1:]:
        if d.support_size != k:
            raise ValueError("distributions have mismatched support")
    m, pairwise = _max_pairwise([d.probs for d in dists])

    std = None
    if raw_reads is not None:
        if len(raw_reads) != len(dists):
            raise ValueError("raw_reads must align with dists")
        rng = stream(seed, "bootstrap")
        reads = [np.asarray(r, dtype=np.int64) for r in raw_reads]
        samples = np.empty(n_resamples)
        for t in range(n_resamples):
            resampled = []
            for r in reads:
                pick = rng.integers(0, len(r), size=len(r))
                counts = np.bincount(r[pick], minlength=k).astype(np.float64)
                resampled.append(counts / counts.sum())
            samples[t], _ = _max_pairwise(resampled)
        std = float(samples.std(ddof=1)) if n_resamples > 1 else 0.0
    return MemoryResult(
        m=m,
        pairwise=pairwise,
        bootstrap_std=std,
        n_resamples=n_resamples if raw_reads is not None else 0,
    )


def estimate_beta_eff(counts: list[tuple[float, float]], h: float) -> tuple[float, float]:
    """Inverse temperature from single-qubit probe readouts.

    Each probe with longitudinal bias h yields beta = ln(n_down/n_up)/(2h);
    the return value is (mean, sample std) across probes. Counts may be
    expected (non-integer) frequencies; zero counts are degenerate.
    """
    if h == 0:
        raise ValueError("probe bias h must be nonzero")
    betas = []
    for n_up, n_down in counts:
        if n_up <= 0 or n_down <= 0:
            raise DegenerateProbeError(
                "probe has a zero count; increase the number of reads"
            )
        betas.append(math.log(n_down / n_up) / (2.0 * h))
    arr = np.asarray(betas)
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return float(arr.mean()), std


def gibbs_vector(instance: IsingInstance, beta: float) -> np.ndarray:
    """Classical Boltzmann distribution over all 2^n configurations."""
    from .landscape import enumerate_energies

    e = enumerate_energies(instance)
    logw = -beta * (e - e.min())
    w = np.exp(logw)
    return w / w.sum()


def conditional_gibbs_reference(
    instance: IsingInstance, beta: float, sigma_e, max_subsystem: int = 20
) -> SubsystemDistribution:
    """Conditional Gibbs marginal over the 2^|S| subsystem configurations
    with the environment clamped to ``sigma_e`` (ordered by ascending
    environment qubit index), by direct enumeration.

    Clamping folds boundary couplers into effective subsystem fields, so
    the enumeration runs on |S| spins regardless of n.
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    sub = list(instance.subsystem)
    k = len(sub)
    if k > max_subsystem:
        raise ValueError(f"conditional enumeration capped at |S| <= {max_subsystem}")
    env = [v for v in range(instance.n) if v not in set(sub)]
    sigma_e = validate_spins(sigma_e, len(env))
    env_spin = dict(zip(env, sigma_e.astype(np.float64)))
    pos = {q: i for i, q in enumerate(sub)}

    h_eff = np.asarray([instance.fields[q] for q in sub], dtype=np.float64)
    sub_edges = []
    for i, j, J in instance.edges:
        if i in pos and j in pos:
            sub_edges.append((pos[i], pos[j], J))
        elif i in pos:
            h_eff[pos[i]] += J * env_spin[j]
        elif j in pos:
            h_eff[pos[j]] += J * env_spin[i]

    idx = np.arange(1 << k, dtype=np.int64)
    spins = 1.0 - 2.0 * ((idx[:, None] >> np.arange(k)) & 1)
    e = spins @ h_eff
    for a, b, J in sub_edges:
        e += J * spins[:, a] * spins[:, b]
    logw = -beta * (e - e.min())
    w = np.exp(logw)
    return SubsystemDistribution(probs=w / w.sum(), subsystem=tuple(sub), n_reads=0)


def sampling_floor(k: int, n_reads: int) -> float:
    """Finite-shot reference distance (1/2) sqrt(K / N_reads)."""
    if k < 1 or n_reads < 1:
        raise ValueError("need K >= 1 and n_reads >= 1")
    return 0.5 * math.sqrt(k / n_reads)


def classify(
    m: float,
    d_tv: float,
    m_threshold: float = M_THRESHOLD,
    d_threshold: float = D_THRESHOLD,
) -> str:
    """Four-way condition bookkeeping from (M, D_TV)."""
    if not (0 <= m <= 1 and 0 <= d_tv <= 1):
        raise ValueError("M and D_TV must lie in [0, 1]")
    relaxed = m <= m_threshold
    near = d_tv < d_threshold
    if relaxed:
        return "relaxed-thermal" if near else "relaxed-trapped"
    return "memory-retaining-aliased" if near else "memory-retaining"


@dataclass(frozen=True)
class ThermalComparison:
    """Distances of a measured subsystem distribution to its references."""

    d_tv_classical: float
    beta_used: float
    sampling_floor: float
    classification: str
    d_tv_quantum_conditional: float | None = None
    d_tv_quantum_unconditional: float | None = None
    per_preparation_d_tv: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "d_tv_classical": self.d_tv_classical,
            "beta_used": self.beta_used,
            "sampling_floor": self.sampling_floor,
            "classification": self.classification,
            "d_tv_quantum_conditional": self.d_tv_quantum_conditional,
            "d_tv_quantum_unconditional": self.d_tv_quantum_unconditional,
            "per_preparation_d_tv": list(self.per_preparation_d_tv),
        }


def beta_sensitivity_sweep(
    measured: SubsystemDistribution,
    instance: IsingInstance,
    sigma_e,
    beta_center: float,
    n_points: int = 9,
    span: float = 3.0,
) -> list[tuple[float, float]]:
    """D_TV against the conditional reference over a log-spaced grid of
    reference temperatures in [beta/span, span*beta]."""
    grid = np.exp(np.linspace(np.log(beta_center / span), np.log(beta_center * span), n_points))
    out = []
    for b in grid:
        ref = conditional_gibbs_reference(instance, float(b), sigma_e)
        out.append((float(b), tvd(measured, ref)))
    return out


def arrhenius_factor(beta: float, gap: float) -> float:
    """Activation exponent beta * gap for single-flip barrier crossing."""
    return beta * gap
