"""Config-driven campaign orchestration.

A campaign is the Cartesian product of sweep axes (environment size,
boundary coupling, disorder, pause depth, frustration density, seeds).
Each condition runs every subsystem preparation against a fixed
environment preparation on the chosen backend, computes the memory order
parameter and the distance to the conditional Gibbs reference, classifies
the outcome, and appends one JSON record per condition to an output file.
Records are written incrementally and keyed by a condition hash, so an
interrupted campaign resumes by skipping finished conditions; all
randomness derives from per-condition seeds, never from scheduling order.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .distributions import (
    SubsystemDistribution,
    empirical_subsystem_distribution,
    pool,
    subsystem_indices,
)
from .diagnostics import (
    M_THRESHOLD,
    MemoryResult,
    ThermalComparison,
    classify,
    conditional_gibbs_reference,
    estimate_beta_eff,
    memory_order_parameter,
    sampling_floor,
    tvd,
)
from .errors import ResourceLimitError
from .lindblad import MAX_LINDBLAD_QUBITS, LindbladChannel
from .model import IsingInstance, make_instance, validate_spins
from .qsim import (
    MAX_DENSE_QUBITS,
    PausePropagator,
    conditional_quantum_marginal,
    quantum_gibbs_diag,
    unconditional_quantum_marginal,
    z_marginal,
)
from .samplers import (
    SamplerRequest,
    glauber_sample,
    parallel_tempering_sample,
    prepare_spins,
    svmc_sample,
)
from .schedule import ScheduleSpec, default_schedule_path
from .streams import stream

__all__ = [
    "CampaignConfig",
    "ConditionRecord",
    "prepare_environment",
    "evaluate_condition",
    "run_campaign",
    "summarize",
    "memory_for_sampler",
    "memory_for_pause",
    "relaxed_fraction",
    "glauber_matching_ratio",
    "simulate_probe_counts",
    "probe_beta",
]

BACKENDS = ("ed", "lindblad", "glauber", "svmc", "pt", "replay")
E_PREPARATIONS = ("all-up", "all-down", "random", "domain-wall", "e-ground")
S_PREPARATIONS = ("all-up", "all-down", "random")


# --- environment preparation ---------------------------------------------


def _descend(e_fun, spins):
    """Greedy steepest single-flip descent to a local minimum."""
    best = e_fun(spins)
    while True:
        improved = False
        for i in range(len(spins)):
            spins[i] = -spins[i]
            e = e_fun(spins)
            if e < best - 1e-12:
                best = e
                improved = True
            else:
                spins[i] = -spins[i]
        if not improved:
            return spins, best


def _environment_ground_state(instance: IsingInstance) -> np.ndarray:
    """Ground state of the E-only Hamiltonian (S decoupled).

    Exact by enumeration for |E| <= 20; beyond that, the best of greedy
    descents from the ordered and field-aligned starts.
    """
    env = list(instance.environment)
    k = len(env)
    pos = {q: i for i, q in enumerate(env)}
    h = np.asarray([instance.fields[q] for q in env])
    edges = [
        (pos[i], pos[j], J)
        for i, j, J in instance.edges
        if i in pos and j in pos
    ]

    if k <= 20:
        idx = np.arange(1 << k, dtype=np.int64)
        spins = 1.0 - 2.0 * ((idx[:, None] >> np.arange(k)) & 1)
        e = spins @ h
        for a, b, J in edges:
            e += J * spins[:, a] * spins[:, b]
        best = int(np.argmin(e))
        return (1 - 2 * ((best >> np.arange(k)) & 1)).astype(np.int8)

    def e_fun(s):
        return float(h @ s + sum(J * s[a] * s[b] for a, b, J in edges))

    candidates = [
        np.ones(k, dtype=np.int8),
        -np.ones(k, dtype=np.int8),
        np.where(h <= 0, 1, -1).astype(np.int8),
    ]
    results = [_descend(e_fun, c.copy()) for c in candidates]
    return min(results, key=lambda r: r[1])[0]


def prepare_environment(instance: IsingInstance, name, seed: int = 0) -> np.ndarray:
    """Environment spins (ordered by ascending qubit index) for a named
    preparation, or a validated explicit configuration."""
    k = instance.n - instance.subsystem_size
    if not isinstance(name, str):
        return validate_spins(name, k)
    if name in ("all-up", "all-down", "random"):
        return prepare_spins(k, name, seed, purpose="prep-E")
    if name == "domain-wall":
        spins = np.ones(k, dtype=np.int8)
        spins[(k + 1) // 2 :] = -1
        return spins
    if name == "e-ground":
        return _environment_ground_state(instance)
    raise ValueError(f"unknown environment preparation {name!r}; use one of {E_PREPARATIONS}")


def full_configuration(instance: IsingInstance, prep_s: str, sigma_e: np.ndarray, seed: int) -> np.ndarray:
    """Assemble the full initial configuration from an S preparation and
    the prepared environment. The random S preparation is fixed per
    condition (one draw per seed, not per read)."""
    config = np.empty(instance.n, dtype=np.int8)
    s_spins = prepare_spins(instance.subsystem_size, prep_s, seed, purpose="prep-S")
    config[list(instance.subsystem)] = s_spins
    config[list(instance.environment)] = sigma_e
    return config


# --- probes ----------------------------------------------------------------


def simulate_probe_counts(
    backend: str,
    h: float = 0.5,
    reads: int = 5000,
    n_probes: int = 3,
    seed: int = 0,
    beta: float | None = None,
    schedule: ScheduleSpec | None = None,
    gamma: float = 1e-5,
) -> list[tuple[int, int]]:
    """Single-qubit probe readout counts for the given backend.

    Classical samplers draw from the exact single-spin Boltzmann law at
    their configured temperature; the quantum backends evolve a single
    biased qubit under the pause Hamiltonian (unitary or thermal channel)
    and sample its readout.
    """
    counts = []
    for k in range(n_probes):
        rng = stream(seed, "probe", k)
        if backend in ("glauber", "svmc", "pt"):
            if beta is None:
                raise ValueError("classical probes need beta")
            p_up = 1.0 / (1.0 + math.exp(2.0 * beta * h))
        elif backend in ("ed", "lindblad"):
            if schedule is None:
                raise ValueError("quantum probes need a schedule")
            p_up = _single_qubit_pause_p_up(
                h, schedule, backend, beta if beta is not None else 0.0, gamma
            )
        else:
            raise ValueError(f"no probe model for backend {backend!r}")
        n_up = int(rng.binomial(reads, p_up))
        counts.append((n_up, reads - n_up))
    return counts


def _single_qubit_pause_p_up(
    h: float, schedule: ScheduleSpec, backend: str, beta: float, gamma: float
) -> float:
    from .qsim import natural_time

    a, b = schedule.a_ghz, schedule.b_ghz
    # basis (up, down); H = -(a/2) sx + (b/2) h sz
    ham = np.array([[0.5 * b * h, -0.5 * a], [-0.5 * a, -0.5 * b * h]])
    w, v = np.linalg.eigh(ham)
    t = natural_time(schedule.t_p_us)
    if backend == "ed":
        psi0 = np.array([1.0, 0.0])
        psi = v @ (np.exp(-1j * w * t) * (v.T @ psi0))
        return float(abs(psi[0]) ** 2)
    # thermal channel: eigenbasis populations relax toward Gibbs at beta
    x_eig = v.T @ np.array([[0.0, 1.0], [1.0, 0.0]]) @ v
    d_e = w[1] - w[0]
    r01 = gamma * x_eig[0, 1] ** 2  # 1 -> 0, downhill
    r10 = r01 * math.exp(-beta * d_e)
    total = r01 + r10
    p0_inf = r01 / total if total > 0 else 0.5
    p0 = v[0, 0] ** 2  # eigen-ground population of the |up> start
    p0_t = p0_inf + (p0 - p0_inf) * math.exp(-total * t)
    pops = np.array([p0_t, 1.0 - p0_t])
    return float(v[0, :] ** 2 @ pops)


def probe_beta(
    backend: str,
    h: float = 0.5,
    reads: int = 5000,
    n_probes: int = 3,
    seed: int = 0,
    **kwargs,
) -> tuple[float, float]:
    """Estimated (beta, std) from simulated single-qubit probes."""
    counts = simulate_probe_counts(backend, h, reads, n_probes, seed, **kwargs)
    return estimate_beta_eff(counts, h)


# --- condition evaluation ----------------------------------------------------


@dataclass(frozen=True)
class ConditionRecord:
    condition: dict
    condition_hash: str
    backend: str
    preparations: list[str]
    sigma_e: list[int]
    distributions: dict
    memory: dict
    thermal: dict
    wall_time_s: float
    version: str
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "condition_hash": self.condition_hash,
            "backend": self.backend,
            "preparations": self.preparations,
            "sigma_e": self.sigma_e,
            "distributions": self.distributions,
            "memory": self.memory,
            "thermal": self.thermal,
            "wall_time_s": self.wall_time_s,
            "version": self.version,
            "error": self.error,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def condition_hash(condition: dict) -> str:
    return hashlib.sha256(json.dumps(condition, sort_keys=True).encode()).hexdigest()[:16]


def _backend_caps(backend: str, n: int) -> None:
    if backend == "ed" and n > MAX_DENSE_QUBITS:
        raise ResourceLimitError(f"ed backend capped at {MAX_DENSE_QUBITS} qubits, condition has {n}")
    if backend == "lindblad" and n > MAX_LINDBLAD_QUBITS:
        raise ResourceLimitError(
            f"lindblad backend capped at {MAX_LINDBLAD_QUBITS} qubits, condition has {n}"
        )


def _run_backend_preparations(condition: dict, instance: IsingInstance, sigma_e, schedule):
    """Per-preparation subsystem distributions plus raw read indices."""
    backend = condition["backend"]
    params = condition.get("backend_params", {})
    beta = condition["beta"]
    seed = condition["seed"]
    sub = instance.subsystem

    dists: list[SubsystemDistribution] = []
    raws: list[np.ndarray] | None = [] if backend in ("glauber", "svmc", "pt") else None

    propagator = None
    channel = None
    if backend == "ed":
        propagator = PausePropagator(
            instance, schedule, energy_scale=params.get("energy_scale", 1.0)
        )
    elif backend == "lindblad":
        channel = LindbladChannel(
            instance,
            schedule,
            beta=beta,
            gamma=params.get("gamma", 1e-5),
            energy_scale=params.get("energy_scale", 1.0),
        )

    for prep in condition["preparations_s"]:
        config = full_configuration(instance, prep, sigma_e, seed)
        if backend in ("glauber", "svmc", "pt"):
            req = SamplerRequest(
                instance=instance,
                beta=beta,
                initial=config,
                sweeps=condition["sweeps"],
                n_samples=condition["reads"],
                seed=stream_seed_for(seed, prep),
                clamp_environment=params.get("clamp_environment", False),
            )
            if backend == "glauber":
                rs = glauber_sample(req)
            elif backend == "svmc":
                rs = svmc_sample(
                    req,
                    transverse_ratio=params.get("transverse_ratio", 0.0),
                    projection=params.get("projection", "sign"),
                )
            else:
                rs = parallel_tempering_sample(
                    req,
                    n_replicas=params.get("n_replicas", 20),
                    t_max_ratio=params.get("t_max_ratio", 10.0),
                )
            dists.append(empirical_subsystem_distribution(rs.reads, sub))
            raws.append(subsystem_indices(rs.reads, sub))
        elif backend == "ed":
            psi = propagator.evolve_config(config, schedule.t_p_us)
            dists.append(z_marginal(psi, sub))
        elif backend == "lindblad":
            from .qsim import basis_state

            rho = channel.evolve(
                basis_state(config), schedule.t_p_us, n_steps=params.get("n_steps", 4000)
            )
            diag = np.clip(np.real(np.diag(rho)), 0.0, None)
            dists.append(unconditional_quantum_marginal(diag / diag.sum(), sub))
        else:
            raise ValueError(f"backend {backend!r} cannot generate samples")
    return dists, raws


def stream_seed_for(seed: int, prep: str) -> int:
    """Per-preparation sampler seed, stable across campaign layout."""
    from .streams import stream_seed

    return stream_seed(seed, "run", prep) % (2**63)


def evaluate_condition(condition: dict) -> ConditionRecord:
    """Run one condition end to end and package the record."""
    start = time.monotonic()
    chash = condition_hash(condition)
    backend = condition["backend"]
    n = condition["n"]
    try:
        _backend_caps(backend, n)
        instance = make_instance(
            n=n,
            subsystem_size=condition["subsystem_size"],
            boundary_scale=condition["lambda"],
            disorder=condition["W"],
            frustration=condition["p_S"],
            seed=condition["seed"],
        )
        schedule = _schedule_for(condition)
        sigma_e = prepare_environment(instance, condition["preparation_e"], condition["seed"])
        dists, raws = _run_backend_preparations(condition, instance, sigma_e, schedule)

        memory = memory_order_parameter(dists, raws, seed=condition["seed"])
        pooled = pool(dists)
        beta = condition["beta"]
        reference = conditional_gibbs_reference(instance, beta, sigma_e)
        d_tv = tvd(pooled, reference)
        per_prep = [tvd(d, reference) for d in dists]

        d_q_cond = d_q_uncond = None
        if condition.get("quantum_reference") and n <= MAX_DENSE_QUBITS:
            diag = _quantum_reference_diag(instance, schedule, beta)
            d_q_cond = tvd(pooled, conditional_quantum_marginal(diag, instance.subsystem, sigma_e))
            d_q_uncond = tvd(pooled, unconditional_quantum_marginal(diag, instance.subsystem))

        floor = (
            sampling_floor(pooled.support_size, pooled.n_reads) if pooled.n_reads > 0 else 0.0
        )
        thermal = ThermalComparison(
            d_tv_classical=d_tv,
            beta_used=beta,
            sampling_floor=floor,
            classification=classify(memory.m, d_tv),
            d_tv_quantum_conditional=d_q_cond,
            d_tv_quantum_unconditional=d_q_uncond,
            per_preparation_d_tv=per_prep,
        )
        record = ConditionRecord(
            condition=condition,
            condition_hash=chash,
            backend=backend,
            preparations=list(condition["preparations_s"]),
            sigma_e=[int(s) for s in sigma_e],
            distributions={
                prep: d.to_dict() for prep, d in zip(condition["preparations_s"], dists)
            },
            memory=memory.to_dict(),
            thermal=thermal.to_dict(),
            wall_time_s=time.monotonic() - start,
            version=__version__,
        )
    except ResourceLimitError as exc:
        record = ConditionRecord(
            condition=condition,
            condition_hash=chash,
            backend=backend,
            preparations=list(condition.get("preparations_s", [])),
            sigma_e=[],
            distributions={},
            memory={},
            thermal={},
            wall_time_s=time.monotonic() - start,
            version=__version__,
            error=str(exc),
        )
    return record


def _quantum_reference_diag(instance: IsingInstance, schedule: ScheduleSpec, beta: float):
    """z diagonal of the reduced Gibbs state of the dimensionless pause
    Hamiltonian -(A/B) sum sx + H_P at the protocol beta; reduces to the
    classical Gibbs vector when A = 0."""
    from .qsim import build_pause_hamiltonian

    dimensionless = ScheduleSpec(
        s_p=schedule.s_p,
        t_p_us=schedule.t_p_us,
        a_ghz=2.0 * schedule.ratio,
        b_ghz=2.0,
    )
    return quantum_gibbs_diag(build_pause_hamiltonian(instance, dimensionless), beta)


def _schedule_for(condition: dict) -> ScheduleSpec:
    path = condition.get("schedule_path") or default_schedule_path()
    return ScheduleSpec.from_file(path, condition["s_p"], condition["t_p_us"])


# --- campaign config ----------------------------------------------------------


_TOP_KEYS = {
    "name",
    "subsystem_size",
    "axes",
    "backend",
    "backend_params",
    "preparations_s",
    "preparation_e",
    "reads",
    "sweeps",
    "schedule",
    "beta",
    "quantum_reference",
    "out_dir",
}
_AXES_KEYS = {"env_sizes", "lambdas", "disorders", "pause_points", "frustrations", "seeds"}
_SCHEDULE_KEYS = {"path", "t_p_us"}
_BETA_KEYS = {"source", "value", "reads", "n_probes", "h"}


@dataclass(frozen=True)
class CampaignConfig:
    """Validated campaign description (see README for the JSON schema)."""

    subsystem_size: int
    axes: dict
    backend: str
    preparations_s: list[str]
    preparation_e: str
    reads: int
    sweeps: int
    schedule: dict
    beta: dict
    backend_params: dict = field(default_factory=dict)
    quantum_reference: bool = False
    out_dir: str = "campaign-out"
    name: str = "campaign"

    @classmethod
    def from_dict(cls, raw: dict) -> "CampaignConfig":
        unknown = set(raw) - _TOP_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        axes = dict(raw["axes"])
        unknown = set(axes) - _AXES_KEYS
        if unknown:
            raise ValueError(f"unknown axes keys: {sorted(unknown)}")
        for key in _AXES_KEYS:
            axes.setdefault(key, None)
        defaults = {
            "env_sizes": [8],
            "lambdas": [0.5],
            "disorders": [0.0],
            "pause_points": [0.4],
            "frustrations": [0.0],
            "seeds": [0],
        }
        for key, val in defaults.items():
            if axes[key] is None:
                axes[key] = val
            if not axes[key]:
                raise ValueError(f"axis {key} must be non-empty")
        backend = raw["backend"]
        if backend not in BACKENDS:
            raise ValueError(f"unknown backend {backend!r}")
        if backend == "replay":
            raise ValueError("replay data flows through the diagnose entry point, not campaigns")
        schedule = dict(raw.get("schedule", {}))
        unknown = set(schedule) - _SCHEDULE_KEYS
        if unknown:
            raise ValueError(f"unknown schedule keys: {sorted(unknown)}")
        schedule.setdefault("path", None)
        schedule.setdefault("t_p_us", 100.0)
        beta = dict(raw.get("beta", {"source": "fixed", "value": 7.219}))
        unknown = set(beta) - _BETA_KEYS
        if unknown:
            raise ValueError(f"unknown beta keys: {sorted(unknown)}")
        if beta.get("source") not in ("fixed", "probe"):
            raise ValueError("beta.source must be 'fixed' or 'probe'")
        if beta["source"] == "fixed" and "value" not in beta:
            raise ValueError("fixed beta needs a value")
        preps = list(raw.get("preparations_s", list(S_PREPARATIONS)))
        for p in preps:
            if p not in S_PREPARATIONS:
                raise ValueError(f"unknown S preparation {p!r}")
        prep_e = raw.get("preparation_e", "all-up")
        if prep_e not in E_PREPARATIONS:
            raise ValueError(f"unknown E preparation {prep_e!r}")
        return cls(
            subsystem_size=int(raw["subsystem_size"]),
            axes=axes,
            backend=backend,
            preparations_s=preps,
            preparation_e=prep_e,
            reads=int(raw.get("reads", 2000)),
            sweeps=int(raw.get("sweeps", 10_000)),
            schedule=schedule,
            beta=beta,
            backend_params=dict(raw.get("backend_params", {})),
            quantum_reference=bool(raw.get("quantum_reference", False)),
            out_dir=raw.get("out_dir", "campaign-out"),
            name=raw.get("name", "campaign"),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "CampaignConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def conditions(self) -> list[dict]:
        """Resolved per-condition parameter dicts, one per grid point."""
        out = []
        axes = self.axes
        for env, lam, w, s_p, p_s, seed in itertools.product(
            axes["env_sizes"],
            axes["lambdas"],
            axes["disorders"],
            axes["pause_points"],
            axes["frustrations"],
            axes["seeds"],
        ):
            n = self.subsystem_size + int(env)
            beta = self._resolve_beta(seed, s_p)
            out.append(
                {
                    "name": self.name,
                    "n": n,
                    "subsystem_size": self.subsystem_size,
                    "env_size": int(env),
                    "lambda": float(lam),
                    "W": float(w),
                    "s_p": float(s_p),
                    "p_S": float(p_s),
                    "seed": int(seed),
                    "backend": self.backend,
                    "backend_params": self.backend_params,
                    "preparations_s": self.preparations_s,
                    "preparation_e": self.preparation_e,
                    "reads": self.reads,
                    "sweeps": self.sweeps,
                    "schedule_path": self.schedule["path"],
                    "t_p_us": self.schedule["t_p_us"],
                    "beta": beta,
                    "quantum_reference": self.quantum_reference,
                }
            )
        return out

    def _resolve_beta(self, seed: int, s_p: float) -> float:
        if self.beta["source"] == "fixed":
            return float(self.beta["value"])
        schedule = ScheduleSpec.from_file(
            self.schedule["path"] or default_schedule_path(), s_p, self.schedule["t_p_us"]
        )
        mean, _ = probe_beta(
            self.backend,
            h=self.beta.get("h", 0.5),
            reads=self.beta.get("reads", 5000),
            n_probes=self.beta.get("n_probes", 3),
            seed=seed,
            beta=self.beta.get("value"),
            schedule=schedule,
        )
        return mean


# --- execution -----------------------------------------------------------------


def _existing_hashes(path: Path) -> set[str]:
    if not path.exists():
        return set()
    hashes = set()
    for line in path.read_text().splitlines():
        if line.strip():
            hashes.add(json.loads(line)["condition_hash"])
    return hashes


def run_campaign(
    config: CampaignConfig,
    out_path: str | Path | None = None,
    workers: int = 1,
    resume: bool = False,
) -> list[ConditionRecord]:
    """Execute all conditions, appending NDJSON records as they finish.

    With ``resume=True`` conditions whose hash is already present in the
    output file are skipped. Worker count does not affect record content,
    only scheduling.
    """
    conditions = config.conditions()
    if out_path is None:
        out_dir = Path(config.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        out_path = out_dir / f"{config.name}.ndjson"
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)

    done = _existing_hashes(out_path) if resume else set()
    if not resume and out_path.exists():
        out_path.unlink()
    todo = [c for c in conditions if condition_hash(c) not in done]

    records: list[ConditionRecord] = []
    mode = "a" if resume else "w"
    with open(out_path, mode) as sink:
        if workers <= 1:
            for cond in todo:
                rec = evaluate_condition(cond)
                sink.write(rec.to_json() + "\n")
                sink.flush()
                records.append(rec)
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool_:
                futures = {pool_.submit(evaluate_condition, c): c for c in todo}
                for fut in as_completed(futures):
                    rec = fut.result()
                    sink.write(rec.to_json() + "\n")
                    sink.flush()
                    records.append(rec)
    return load_records(out_path)


def load_records(path: str | Path) -> list[ConditionRecord]:
    """Records from an NDJSON file, ordered by condition hash."""
    records = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        records.append(
            ConditionRecord(
                condition=d["condition"],
                condition_hash=d["condition_hash"],
                backend=d["backend"],
                preparations=d["preparations"],
                sigma_e=d["sigma_e"],
                distributions=d["distributions"],
                memory=d["memory"],
                thermal=d["thermal"],
                wall_time_s=d["wall_time_s"],
                version=d["version"],
                error=d.get("error"),
            )
        )
    return sorted(records, key=lambda r: r.condition_hash)


def summarize(records: list[ConditionRecord]) -> dict:
    ok = [r for r in records if r.error is None]
    by_class: dict[str, int] = {}
    for r in ok:
        c = r.thermal.get("classification")
        by_class[c] = by_class.get(c, 0) + 1
    relaxed = sum(
        1 for r in ok if r.memory.get("M") is not None and r.memory["M"] <= M_THRESHOLD
    )
    return {
        "n_conditions": len(records),
        "n_errors": len(records) - len(ok),
        "by_classification": by_class,
        "relaxed_fraction": relaxed / len(ok) if ok else None,
    }


# --- sampler-level memory helpers (used by the stress-test protocols) ---------


_SAMPLER_FN = {
    "glauber": lambda req, params: glauber_sample(req),
    "svmc": lambda req, params: svmc_sample(
        req,
        transverse_ratio=params.get("transverse_ratio", 0.0),
        projection=params.get("projection", "sign"),
    ),
    "pt": lambda req, params: parallel_tempering_sample(
        req,
        n_replicas=params.get("n_replicas", 20),
        t_max_ratio=params.get("t_max_ratio", 10.0),
    ),
}


def memory_for_sampler(
    instance: IsingInstance,
    sampler: str,
    beta: float,
    preparations=S_PREPARATIONS,
    preparation_e: str = "all-up",
    reads: int = 2000,
    sweeps: int = 10_000,
    seed: int = 0,
    n_resamples: int = 0,
    params: dict | None = None,
) -> MemoryResult:
    """Run all S preparations on a classical sampler and compute M.

    Bootstrap errors are skipped unless ``n_resamples`` is positive.
    """
    params = params or {}
    sigma_e = prepare_environment(instance, preparation_e, seed)
    dists, raws = [], []
    for prep in preparations:
        config = full_configuration(instance, prep, sigma_e, seed)
        req = SamplerRequest(
            instance=instance,
            beta=beta,
            initial=config,
            sweeps=sweeps,
            n_samples=reads,
            seed=stream_seed_for(seed, prep),
            clamp_environment=params.get("clamp_environment", False),
        )
        rs = _SAMPLER_FN[sampler](req, params)
        dists.append(empirical_subsystem_distribution(rs.reads, instance.subsystem))
        raws.append(subsystem_indices(rs.reads, instance.subsystem))
    return memory_order_parameter(
        dists, raws if n_resamples > 0 else None, n_resamples=n_resamples, seed=seed
    )


def memory_for_pause(
    instance: IsingInstance,
    schedule: ScheduleSpec,
    preparations=S_PREPARATIONS,
    preparation_e: str = "all-up",
    seed: int = 0,
    energy_scale: float = 1.0,
) -> MemoryResult:
    """Unitary pause-evolution memory protocol: evolve each preparation
    under the fixed pause Hamiltonian for the pause time and compare the
    exact subsystem readouts. ``energy_scale`` is the programmed problem
    scale (the schedule ratio is untouched)."""
    propagator = PausePropagator(instance, schedule, energy_scale=energy_scale)
    sigma_e = prepare_environment(instance, preparation_e, seed)
    dists = []
    for prep in preparations:
        config = full_configuration(instance, prep, sigma_e, seed)
        psi = propagator.evolve_config(config, schedule.t_p_us)
        dists.append(z_marginal(psi, instance.subsystem))
    return memory_order_parameter(dists)


def relaxed_fraction(
    instances: list[IsingInstance],
    sampler: str,
    beta: float,
    m_threshold: float = M_THRESHOLD,
    **kwargs,
) -> float:
    """Fraction of instances whose three-preparation M is at or below
    the relaxation threshold. Per-instance seeds come from the instance
    generation metadata."""
    relaxed = 0
    for inst in instances:
        res = memory_for_sampler(
            inst, sampler, beta, seed=int(inst.meta.get("seed", 0)), **kwargs
        )
        if res.m <= m_threshold:
            relaxed += 1
    return relaxed / len(instances)


def glauber_matching_ratio(
    instances: list[IsingInstance],
    beta_device: float,
    target_fraction: float,
    t_ratios=(1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 4.8, 6.0, 8.0, 10.0),
    **kwargs,
) -> tuple[float | None, list[tuple[float, float]]]:
    """Scan Glauber over temperature multiples of the device temperature
    and report the first ratio whose relaxed fraction reaches the target
    (None if never reached), plus the full scan curve."""
    curve = []
    match = None
    for ratio in t_ratios:
        frac = relaxed_fraction(instances, "glauber", beta_device / ratio, **kwargs)
        curve.append((ratio, frac))
        if match is None and frac >= target_fraction:
            match = ratio
    return match, curve
