"""Ingestion of externally produced samplesets (replay files).

Replay schema: a JSON object (or list of objects)

    {"instance": <instance JSON>,
     "preparation": {"S": "all-up", "E": "all-up"},
     "variables": [qubit indices in read column order],
     "reads": [[+-1, ...], ...],
     "meta": {...}}

``variables`` must cover every instance qubit exactly once; reads are
remapped to ascending qubit order on ingestion, after which replay data
flows through the same diagnostics as every simulated backend.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .campaign import prepare_environment
from .diagnostics import (
    classify,
    conditional_gibbs_reference,
    memory_order_parameter,
    sampling_floor,
    tvd,
    ThermalComparison,
)
from .distributions import empirical_subsystem_distribution, pool, subsystem_indices
from .errors import ReplayFormatError
from .model import IsingInstance
from .samplers import ReadSet

__all__ = ["ingest_replay", "diagnose_replay"]

_ENTRY_KEYS = {"instance", "preparation", "variables", "reads", "meta"}


def _parse_entry(entry: dict, where: str) -> tuple[str, tuple[str, str], IsingInstance, ReadSet]:
    unknown = set(entry) - _ENTRY_KEYS
    if unknown:
        raise ReplayFormatError(f"{where}: unknown keys {sorted(unknown)}")
    missing = _ENTRY_KEYS - {"meta"} - set(entry)
    if missing:
        raise ReplayFormatError(f"{where}: missing keys {sorted(missing)}")

    try:
        instance = IsingInstance.from_dict(entry["instance"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ReplayFormatError(f"{where}: bad instance ({exc})") from exc

    variables = entry["variables"]
    if sorted(variables) != list(range(instance.n)):
        raise ReplayFormatError(
            f"{where}: variables must list every qubit 0..{instance.n - 1} exactly once"
        )

    reads = entry["reads"]
    if not reads:
        raise ReplayFormatError(f"{where}: empty reads array")
    arr = np.asarray(reads)
    if arr.ndim != 2 or arr.shape[1] != instance.n:
        raise ReplayFormatError(
            f"{where}: reads must be rows of length {instance.n}, got shape {arr.shape}"
        )
    if not np.all(np.abs(arr) == 1):
        bad = int(np.flatnonzero(np.abs(arr.ravel()) != 1)[0])
        raise ReplayFormatError(
            f"{where}: reads must contain only +1/-1 (bad value at flat index {bad})"
        )

    # remap read columns to ascending qubit order
    order = np.argsort(np.asarray(variables))
    remapped = arr[:, order].astype(np.int8)

    prep = entry["preparation"]
    if not isinstance(prep, dict) or set(prep) - {"S", "E"}:
        raise ReplayFormatError(f"{where}: preparation must be a dict with keys S and E")
    prep_key = (str(prep.get("S", "?")), str(prep.get("E", "?")))

    meta = entry.get("meta", {})
    condition_id = str(meta.get("condition", "condition-0"))
    readset = ReadSet(reads=remapped, sampler="replay", request={"meta": meta})
    return condition_id, prep_key, instance, readset


def ingest_replay(path: str | Path) -> dict:
    """Validated replay data keyed by (condition id, (prep_S, prep_E)).

    Returns a dict mapping keys to (instance, ReadSet, preparation dict).
    """
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ReplayFormatError(f"{path}: not valid JSON ({exc})") from exc
    entries = doc if isinstance(doc, list) else [doc]
    out = {}
    for k, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ReplayFormatError(f"{path}[{k}]: entry must be an object")
        cid, prep_key, instance, readset = _parse_entry(entry, f"{path}[{k}]")
        key = (cid, prep_key)
        if key in out:
            raise ReplayFormatError(f"{path}[{k}]: duplicate condition/preparation {key}")
        out[key] = (instance, readset, dict(entry["preparation"]))
    return out


def diagnose_replay(path: str | Path, beta: float) -> list[dict]:
    """Memory + thermal diagnostics over replay data, grouped by condition.

    Within a condition the E preparation must be shared; the conditional
    reference clamps the environment to that prepared state.
    """
    ingested = ingest_replay(path)
    by_condition: dict[str, list] = {}
    for (cid, prep_key), (instance, readset, prep) in ingested.items():
        by_condition.setdefault(cid, []).append((prep_key, instance, readset, prep))

    results = []
    for cid, group in sorted(by_condition.items()):
        group.sort(key=lambda g: g[0])
        instance = group[0][1]
        e_preps = {g[0][1] for g in group}
        if len(e_preps) != 1:
            raise ReplayFormatError(
                f"condition {cid}: mixed E preparations {sorted(e_preps)} in one condition"
            )
        prep = group[0][3]
        sigma_e = prep["E"]
        if isinstance(sigma_e, str):
            sigma_e = prepare_environment(instance, sigma_e, int(instance.meta.get("seed", 0)))
        dists = [
            empirical_subsystem_distribution(g[2].reads, instance.subsystem) for g in group
        ]
        raws = [subsystem_indices(g[2].reads, instance.subsystem) for g in group]
        seed = int(instance.meta.get("seed", 0))
        if len(dists) >= 2:
            memory = memory_order_parameter(dists, raws, seed=seed)
        else:
            memory = None
        pooled = pool(dists)
        reference = conditional_gibbs_reference(instance, beta, sigma_e)
        d_tv = tvd(pooled, reference)
        thermal = ThermalComparison(
            d_tv_classical=d_tv,
            beta_used=beta,
            sampling_floor=sampling_floor(pooled.support_size, pooled.n_reads),
            classification=classify(memory.m, d_tv) if memory else "unclassified",
            per_preparation_d_tv=[tvd(d, reference) for d in dists],
        )
        results.append(
            {
                "condition": cid,
                "preparations": [g[0][0] for g in group],
                "memory": memory.to_dict() if memory else None,
                "thermal": thermal.to_dict(),
                "n_reads": int(pooled.n_reads),
            }
        )
    return results
