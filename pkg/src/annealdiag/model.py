"""Ising problem instances: random 3-regular graphs with a connected
subsystem, scaled boundary couplers, quenched disorder, and mixed
frustration.

Conventions used everywhere in this package:

* spins take values +1/-1; configuration arrays are int8,
* couplers are stored pre-scaled, i.e. boundary entries already carry
  the factor ``-boundary_scale`` so every backend evaluates the same
  ``sum_i h_i s_i + sum_(ij) J_ij s_i s_j``.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GenerationError
from .streams import stream

__all__ = [
    "IsingInstance",
    "generate_random_3regular",
    "build_instance",
    "make_instance",
    "regenerate_instance",
    "energy",
    "adjacency_csr",
    "validate_spins",
]

FAMILY_3REGULAR = "random-3-regular"


def validate_spins(config: np.ndarray, n: int | None = None) -> np.ndarray:
    """Return ``config`` as an int8 array, checking every entry is +-1."""
    arr = np.asarray(config)
    if n is not None and arr.shape != (n,):
        raise ValueError(f"expected configuration of length {n}, got shape {arr.shape}")
    if not np.all(np.abs(arr) == 1):
        raise ValueError("spin configuration entries must be +1 or -1")
    return arr.astype(np.int8)


@dataclass(frozen=True)
class IsingInstance:
    """A problem Hamiltonian with a subsystem/environment split.

    ``edges`` holds (i, j, J_ij) with i < j and J already scaled: intra-S
    and intra-E couplers are -1 (possibly sign-flipped inside S), boundary
    couplers are ``-boundary_scale``. ``subsystem`` is sorted ascending.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]
    fields: tuple[float, ...]
    subsystem: tuple[int, ...]
    boundary_scale: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least 2 vertices")
        if len(self.fields) != self.n:
            raise ValueError("fields length must equal n")
        seen = set()
        for i, j, _ in self.edges:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i},{j}) out of range")
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if i > j:
                raise ValueError(f"edge ({i},{j}) not sorted i<j")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i},{j})")
            seen.add((i, j))
        for v in self.subsystem:
            if not 0 <= v < self.n:
                raise ValueError(f"subsystem vertex {v} out of range")
        if list(self.subsystem) != sorted(set(self.subsystem)):
            raise ValueError("subsystem must be sorted and duplicate-free")
        if not _connected_in(set(self.subsystem), self.edges):
            raise ValueError("subsystem does not induce a connected subgraph")
        if not 0.0 <= self.boundary_scale <= 1.0:
            raise ValueError("boundary_scale must lie in [0, 1]")
        if self.meta.get("family") == FAMILY_3REGULAR:
            deg = np.zeros(self.n, dtype=int)
            for i, j, _ in self.edges:
                deg[i] += 1
                deg[j] += 1
            if self.n % 2 or not np.all(deg == 3):
                raise ValueError("family random-3-regular requires even n and all degrees 3")

    @property
    def environment(self) -> tuple[int, ...]:
        s = set(self.subsystem)
        return tuple(v for v in range(self.n) if v not in s)

    @property
    def subsystem_size(self) -> int:
        return len(self.subsystem)

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(i, j, J) as flat arrays, for vectorized energy kernels."""
        if not self.edges:
            z = np.zeros(0)
            return z.astype(np.int64), z.astype(np.int64), z
        ii, jj, jc = zip(*self.edges)
        return np.asarray(ii, dtype=np.int64), np.asarray(jj, dtype=np.int64), np.asarray(jc)

    def field_array(self) -> np.ndarray:
        return np.asarray(self.fields, dtype=np.float64)

    # --- serialization (lossless JSON round trip) ---

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "edges": [[i, j, J] for i, j, J in self.edges],
            "fields": list(self.fields),
            "subsystem": list(self.subsystem),
            "meta": dict(self.meta) | {"lambda": self.boundary_scale},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IsingInstance":
        meta = dict(d["meta"])
        lam = meta.pop("lambda")
        return cls(
            n=int(d["n"]),
            edges=tuple((int(i), int(j), float(J)) for i, j, J in d["edges"]),
            fields=tuple(float(h) for h in d["fields"]),
            subsystem=tuple(int(v) for v in d["subsystem"]),
            boundary_scale=float(lam),
            meta=meta,
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "IsingInstance":
        return cls.from_dict(json.loads(text))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "IsingInstance":
        return cls.from_json(Path(path).read_text())


def _connected_in(vertices: set[int], edges) -> bool:
    if not vertices:
        return False
    if len(vertices) == 1:
        return True
    adj = {v: [] for v in vertices}
    for i, j, *_ in edges:
        if i in vertices and j in vertices:
            adj[i].append(j)
            adj[j].append(i)
    start = next(iter(vertices))
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen == vertices


def generate_random_3regular(n: int, seed: int, max_tries: int = 10_000) -> list[tuple[int, int]]:
    """Random simple connected 3-regular graph via the pairing model.

    Each vertex contributes three stubs; stubs are paired uniformly at
    random and the draw is rejected (and retried from the same stream) on
    self-loops, multi-edges, or a disconnected result. Deterministic for
    fixed seed.
    """
    if n < 4 or n % 2:
        raise ValueError("3-regular graphs need even n >= 4")
    rng = stream(seed, "graph")
    stubs = np.repeat(np.arange(n), 3)
    for _ in range(max_tries):
        perm = rng.permutation(stubs)
        pairs = perm.reshape(-1, 2)
        edges = set()
        ok = True
        for a, b in pairs:
            i, j = (int(a), int(b)) if a < b else (int(b), int(a))
            if i == j or (i, j) in edges:
                ok = False
                break
            edges.add((i, j))
        if not ok:
            continue
        if _connected_in(set(range(n)), [(i, j, 0) for i, j in edges]):
            return sorted(edges)
    raise GenerationError(f"no simple connected 3-regular graph found in {max_tries} tries")


def _bfs_subsystem(n: int, edges, size: int) -> tuple[int, ...]:
    """First ``size`` vertices in BFS order from vertex 0, neighbors ascending."""
    adj = {v: [] for v in range(n)}
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    for v in adj:
        adj[v].sort()
    order = []
    seen = {0}
    queue = deque([0])
    while queue and len(order) < size:
        v = queue.popleft()
        order.append(v)
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    if len(order) < size:
        raise GenerationError("graph component of vertex 0 is smaller than the requested subsystem")
    return tuple(sorted(order))


def build_instance(
    graph,
    subsystem_size: int,
    boundary_scale: float,
    disorder: float,
    frustration: float,
    seed: int,
    n: int | None = None,
    family: str = "custom",
) -> IsingInstance:
    """Assemble an instance from a bare edge list.

    The subsystem S grows breadth-first from vertex 0. All couplers start
    ferromagnetic: -1 inside S and E, -boundary_scale across the S/E cut.
    Mixed frustration then sign-flips each coupler incident to S (both
    S-internal and boundary) independently with probability
    ``frustration``; the environment-internal couplers are never flipped,
    so E keeps its ferromagnetic bath character. Fields are drawn i.i.d.
    uniform on [-disorder, +disorder] for every vertex.
    """
    edges = [(int(i), int(j)) if i < j else (int(j), int(i)) for i, j in graph]
    if n is None:
        n = 1 + max(max(i, j) for i, j in edges)
    if not 1 <= subsystem_size <= n:
        raise ValueError("subsystem_size out of range")
    if not 0.0 <= boundary_scale <= 1.0:
        raise ValueError("boundary_scale must lie in [0, 1]")
    if disorder < 0:
        raise ValueError("disorder width must be >= 0")
    if not 0.0 <= frustration <= 1.0:
        raise ValueError("frustration probability must lie in [0, 1]")

    subsystem = _bfs_subsystem(n, edges, subsystem_size)
    sset = set(subsystem)

    flip_rng = stream(seed, "frustration")
    coupled = []
    for i, j in sorted(edges):
        in_e = i not in sset and j not in sset
        if in_e:
            J = -1.0
        else:
            magnitude = 1.0 if (i in sset and j in sset) else boundary_scale
            J = -magnitude
            if flip_rng.random() < frustration:
                J = magnitude
        coupled.append((i, j, J))

    field_rng = stream(seed, "fields")
    h = field_rng.uniform(-disorder, disorder, size=n) if disorder > 0 else np.zeros(n)

    meta = {
        "seed": int(seed),
        "W": float(disorder),
        "p_S": float(frustration),
        "family": family,
    }
    if boundary_scale == 0.0:
        meta["decoupled_control"] = True

    return IsingInstance(
        n=n,
        edges=tuple(coupled),
        fields=tuple(float(x) for x in h),
        subsystem=subsystem,
        boundary_scale=float(boundary_scale),
        meta=meta,
    )


def make_instance(
    n: int,
    subsystem_size: int,
    boundary_scale: float,
    disorder: float,
    frustration: float,
    seed: int,
) -> IsingInstance:
    """Random-3-regular graph plus :func:`build_instance`, one seed for both."""
    graph = generate_random_3regular(n, seed)
    return build_instance(
        graph,
        subsystem_size,
        boundary_scale,
        disorder,
        frustration,
        seed,
        n=n,
        family=FAMILY_3REGULAR,
    )


def regenerate_instance(spec: dict) -> IsingInstance:
    """Rebuild an instance from the generation metadata embedded in records."""
    return make_instance(
        n=int(spec["n"]),
        subsystem_size=int(spec["subsystem_size"]),
        boundary_scale=float(spec["lambda"]),
        disorder=float(spec["W"]),
        frustration=float(spec["p_S"]),
        seed=int(spec["seed"]),
    )


def energy(instance: IsingInstance, config) -> float:
    """H_P(s) = sum_i h_i s_i + sum_(ij) J_ij s_i s_j (couplers pre-scaled)."""
    s = validate_spins(config, instance.n).astype(np.float64)
    ii, jj, jc = instance.edge_arrays()
    return float(instance.field_array() @ s + jc @ (s[ii] * s[jj]))


def adjacency_csr(instance: IsingInstance):
    """Neighbor lists in CSR form (ptr, idx, weight) for sweep kernels."""
    n = instance.n
    lists = [[] for _ in range(n)]
    for i, j, J in instance.edges:
        lists[i].append((j, J))
        lists[j].append((i, J))
    ptr = np.zeros(n + 1, dtype=np.int64)
    idx, w = [], []
    for v in range(n):
        ptr[v + 1] = ptr[v] + len(lists[v])
        for u, J in sorted(lists[v]):
            idx.append(u)
            w.append(J)
    return ptr, np.asarray(idx, dtype=np.int64), np.asarray(w, dtype=np.float64)
