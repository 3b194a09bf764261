"""Exact enumeration of classical instances: full energy tables, local
minima, the gap between the global and second-lowest local minimum, and
Boltzmann weights of steepest-descent basins.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from .distributions import index_to_config
from .errors import ResourceLimitError
from .model import IsingInstance, adjacency_csr

__all__ = [
    "MAX_ENUM_QUBITS",
    "LandscapeReport",
    "enumerate_energies",
    "local_minima",
    "basin_assignment",
    "basin_weights",
    "analyze",
    "write_gap_histogram",
]

MAX_ENUM_QUBITS = 20


@njit(cache=True)
def _gray_energy_table(n, h, nbr_ptr, nbr_idx, nbr_w, e0):
    table = np.empty(1 << n, dtype=np.float64)
    spins = np.ones(n, dtype=np.int8)
    e = e0
    table[0] = e
    for k in range(1, 1 << n):
        # flip bit = trailing zeros of k; gray index = k ^ (k >> 1)
        i = 0
        kk = k
        while kk & 1 == 0:
            kk >>= 1
            i += 1
        f = h[i]
        for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
            f += nbr_w[p] * spins[nbr_idx[p]]
        e -= 2.0 * spins[i] * f
        spins[i] = -spins[i]
        table[k ^ (k >> 1)] = e
    return table


def enumerate_energies(instance: IsingInstance) -> np.ndarray:
    """Energy of every configuration, indexed by basis index.

    Computed incrementally along a Gray-code walk (one spin flip per
    step), so the cost is O(2^n * degree) instead of O(2^n * n * degree).
    """
    if instance.n > MAX_ENUM_QUBITS:
        raise ResourceLimitError(f"enumeration capped at n <= {MAX_ENUM_QUBITS}")
    h = instance.field_array()
    ptr, idx, w = adjacency_csr(instance)
    e0 = float(h.sum() + sum(J for _, _, J in instance.edges))
    return _gray_energy_table(instance.n, h, ptr, idx, w, e0)


def _flip_energy_scan(table: np.ndarray, n: int):
    """Per-config best single-flip move. Returns (strict_min mask,
    weak-tie mask, steepest-descent target indices)."""
    size = len(table)
    idx = np.arange(size, dtype=np.int64)
    strict = np.ones(size, dtype=bool)
    weak = np.ones(size, dtype=bool)
    best_e = np.full(size, np.inf)
    best_t = idx.copy()
    for i in range(n):
        flipped = idx ^ (1 << i)
        fe = table[flipped]
        strict &= fe > table
        weak &= fe >= table
        better = fe < best_e  # strict < keeps the lowest flip index on ties
        best_e[better] = fe[better]
        best_t[better] = flipped[better]
    downhill = best_e < table
    target = np.where(downhill, best_t, idx)
    ties = weak & ~strict
    return strict, ties, target


def local_minima(table: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """Configurations where every single flip strictly increases energy.

    Returns (indices sorted by energy, their energies, tie count). Ties
    (some flip with dE = 0 and none downhill) are non-minimal but counted.
    """
    n = int(np.log2(len(table)))
    strict, ties, _ = _flip_energy_scan(table, n)
    mins = np.flatnonzero(strict)
    order = np.argsort(table[mins], kind="stable")
    mins = mins[order]
    return mins, table[mins], int(ties.sum())


def basin_assignment(table: np.ndarray) -> np.ndarray:
    """Steepest-descent basin root for every configuration.

    Greedy descent follows the single flip with the lowest resulting
    energy (ties broken by lowest flipped index) until no strictly
    downhill flip remains; roots are returned as basis indices.
    """
    n = int(np.log2(len(table)))
    _, _, target = _flip_energy_scan(table, n)
    while True:
        nxt = target[target]
        if np.array_equal(nxt, target):
            return target
        target = nxt


def basin_weights(table: np.ndarray, beta: float, seeds=None) -> dict[int, float]:
    """Boltzmann weight of each steepest-descent basin at inverse
    temperature ``beta``, keyed by basin root index.

    With ``seeds`` (iterable of config indices) the map is keyed by the
    given indices and reports the weight of the basin containing each.
    """
    roots = basin_assignment(table)
    logw = -beta * (table - table.min())
    w = np.exp(logw)
    w /= w.sum()
    totals: dict[int, float] = {}
    for root in np.unique(roots):
        totals[int(root)] = float(w[roots == root].sum())
    if seeds is None:
        return totals
    return {int(s): totals[int(roots[int(s)])] for s in seeds}


@dataclass(frozen=True)
class LandscapeReport:
    """Enumeration summary for one instance."""

    n: int
    n_local_minima: int
    global_minimum: tuple[int, float]
    second_lowest_local_minimum: tuple[int, float] | None
    gap: float
    n_ties: int
    lowest_outside_global_basin: tuple[int, float] | None = None
    basin_weights_at_beta: dict | None = None
    beta: float | None = None
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def cfg(pair):
            if pair is None:
                return None
            i, e = pair
            return {
                "index": int(i),
                "config": [int(s) for s in index_to_config(i, self.n)],
                "energy": float(e),
            }

        return {
            "n": self.n,
            "n_local_minima": self.n_local_minima,
            "global_minimum": cfg(self.global_minimum),
            "second_lowest_local_minimum": cfg(self.second_lowest_local_minimum),
            "gap": self.gap,
            "n_ties": self.n_ties,
            "lowest_outside_global_basin": cfg(self.lowest_outside_global_basin),
            "basin_weights_at_beta": self.basin_weights_at_beta,
            "beta": self.beta,
            "meta": self.meta,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n")


def analyze(instance: IsingInstance, beta: float | None = None) -> LandscapeReport:
    """Full landscape report: minima, gap, and optional basin weights.

    The gap is the energy difference between the global minimum and the
    second-lowest local minimum ordered by energy; the lowest minimum
    outside the global basin is reported alongside as an alternative
    reading of "second".
    """
    table = enumerate_energies(instance)
    mins, energies, n_ties = local_minima(table)
    gmin = (int(mins[0]), float(energies[0]))
    second = (int(mins[1]), float(energies[1])) if len(mins) > 1 else None
    gap = float(energies[1] - energies[0]) if second else 0.0

    roots = basin_assignment(table)
    outside = None
    for i, e in zip(mins[1:], energies[1:]):
        if roots[int(i)] != roots[gmin[0]]:
            outside = (int(i), float(e))
            break

    weights = None
    if beta is not None:
        weights = {str(k): v for k, v in basin_weights(table, beta).items()}

    return LandscapeReport(
        n=instance.n,
        n_local_minima=len(mins),
        global_minimum=gmin,
        second_lowest_local_minimum=second,
        gap=gap,
        n_ties=n_ties,
        lowest_outside_global_basin=outside,
        basin_weights_at_beta=weights,
        beta=beta,
        meta=dict(instance.meta),
    )


def write_gap_histogram(gaps, path: str | Path, n_bins: int = 10) -> None:
    """Histogram of minimum-to-second-minimum gaps as CSV (bin edges, counts)."""
    gaps = np.asarray(list(gaps), dtype=np.float64)
    counts, edges = np.histogram(gaps, bins=n_bins)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_left", "bin_right", "count"])
        for k in range(len(counts)):
            writer.writerow([f"{edges[k]:.6g}", f"{edges[k + 1]:.6g}", int(counts[k])])
