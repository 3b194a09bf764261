#!/usr/bin/env python3
"""Builds the committed replay fixture and its expected-values manifest.

The expected memory order parameter is computed here with a standalone
Counter-based implementation, independent of the package's numpy path,
so the ingestion test checks against a second route. Rerun this script
only if the fixture needs regenerating; commit both JSON files.
"""

import json
import sys
from collections import Counter
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[2] / "src"))

import numpy as np

from annealdiag.model import make_instance
from annealdiag.campaign import full_configuration, prepare_environment
from annealdiag.samplers import SamplerRequest, glauber_sample

HERE = Path(__file__).parent


def standalone_memory(read_groups, subsystem):
    """Max pairwise TVD from raw reads, pure-python implementation."""

    def marginal(reads):
        counts = Counter(
            tuple(int(r[q]) for q in subsystem) for r in reads
        )
        total = sum(counts.values())
        return {k: v / total for k, v in counts.items()}

    margs = [marginal(g) for g in read_groups]
    m = 0.0
    for a in range(len(margs)):
        for b in range(a + 1, len(margs)):
            keys = set(margs[a]) | set(margs[b])
            d = 0.5 * sum(
                abs(margs[a].get(k, 0.0) - margs[b].get(k, 0.0)) for k in keys
            )
            m = max(m, d)
    return m


def main():
    instance = make_instance(8, 4, 0.5, 1.0, 0.5, seed=42)
    sigma_e = prepare_environment(instance, "all-up", 42)
    variables = list(np.roll(np.arange(8), 3))  # deliberately scrambled order

    entries = []
    read_groups = []
    seeds = {"all-up": 101, "all-down": 202, "random": 303}
    for prep in ("all-up", "all-down", "random"):
        config = full_configuration(instance, prep, sigma_e, 42)
        req = SamplerRequest(
            instance=instance, beta=2.0, initial=config,
            sweeps=500, n_samples=400, seed=seeds[prep],
        )
        reads = glauber_sample(req).reads
        read_groups.append(reads)
        entries.append(
            {
                "instance": instance.to_dict(),
                "preparation": {"S": prep, "E": "all-up"},
                "variables": [int(v) for v in variables],
                "reads": reads[:, variables].tolist(),
                "meta": {"condition": "fixture-42", "source": "glauber"},
            }
        )

    (HERE / "replay_fixture.json").write_text(json.dumps(entries, indent=1) + "\n")
    manifest = {
        "condition": "fixture-42",
        "expected_m": standalone_memory(read_groups, instance.subsystem),
        "n_reads_total": int(sum(len(g) for g in read_groups)),
        "subsystem": list(instance.subsystem),
    }
    (HERE / "replay_fixture_manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    print("expected M:", manifest["expected_m"])


if __name__ == "__main__":
    main()
