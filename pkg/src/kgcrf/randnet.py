"""Seeded random network generators and attribute-driven edge weights."""
from __future__ import annotations

import math
from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import DegreeOutOfRangeError, DimensionMismatchError
from .graph import SimilarityMatrix

GRAPH_TYPES = ("er", "ba", "ws")
DEFAULT_P_REWIRE = 0.1


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream addressed by ``(seed, stream)``.

    ``generator(*path)`` derives independent child generators, so the same
    address always yields the same sequence.
    """

    seed: int
    stream: int = 0

    def generator(self, *path: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream, *path))
        return np.random.default_rng(ss)


@dataclass(frozen=True)
class GraphTopology:
    n: int
    edges: frozenset

    def __post_init__(self):
        for i, j in self.edges:
            if i == j:
                raise ValueError("self-loop in edge set")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range")

    @classmethod
    def from_pairs(cls, n: int, pairs) -> "GraphTopology":
        return cls(n, frozenset((min(i, j), max(i, j)) for i, j in pairs))

    @property
    def m(self) -> int:
        return len(self.edges)

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        if self.edges:
            idx = np.array(sorted(self.edges))
            A[idx[:, 0], idx[:, 1]] = 1.0
            A[idx[:, 1], idx[:, 0]] = 1.0
        return A

    def is_connected(self) -> bool:
        return connected_components(self.adjacency(), directed=False)[0] == 1


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    return rng


def _target_edges(n: int, rho: float) -> float:
    return rho * n * (n - 1) / 2


def gen_erdos_renyi(n: int, rho: float, rng) -> GraphTopology:
    """G(n, M) graph with ``M = floor(rho * n(n-1)/2)`` uniformly chosen edges."""
    if n < 2 or not 0 < rho <= 1:
        raise ValueError(f"need n >= 2 and 0 < rho <= 1, got n={n}, rho={rho}")
    gen = _as_generator(rng)
    M = math.floor(_target_edges(n, rho) + 1e-9)
    iu, ju = np.triu_indices(n, 1)
    pick = gen.choice(iu.size, size=M, replace=False)
    return GraphTopology(n, frozenset(zip(iu[pick].tolist(), ju[pick].tolist())))


def ws_ring_degree(n: int, rho: float) -> int:
    return 2 * round(rho * (n - 1) / 2)


def gen_watts_strogatz(n: int, rho: float, rng, p_rewire: float = DEFAULT_P_REWIRE) -> GraphTopology:
    """Small-world graph: ring lattice of even degree k, edges rewired with p_rewire."""
    k = ws_ring_degree(n, rho)
    if k < 2 or k >= n:
        raise DegreeOutOfRangeError(f"ring degree {k} outside [2, {n - 1}] for n={n}, rho={rho}")
    g = nx.watts_strogatz_graph(n, k, p_rewire, seed=_as_generator(rng))
    return GraphTopology.from_pairs(n, g.edges())


def ba_attachment(n: int, rho: float) -> int:
    """Attachment count m whose edge total m(n-m) is nearest the density target.

    Ties go to the larger m; m is capped at n // 2, where m(n-m) peaks.
    """
    target = _target_edges(n, rho)
    best, best_err = 1, math.inf
    for m in range(1, n // 2 + 1):
        err = abs(m * (n - m) - target)
        if err <= best_err:
            best, best_err = m, err
    return best


def gen_barabasi_albert(n: int, rho: float, rng) -> GraphTopology:
    """Preferential-attachment graph with m(n-m) edges (m from ba_attachment)."""
    if n < 3 or rho <= 0:
        raise ValueError(f"need n >= 3 and rho > 0, got n={n}, rho={rho}")
    m = ba_attachment(n, rho)
    g = nx.barabasi_albert_graph(n, m, seed=_as_generator(rng))
    return GraphTopology.from_pairs(n, g.edges())


_GENERATORS = {
    "er": lambda n, rho, gen, p: gen_erdos_renyi(n, rho, gen),
    "ba": lambda n, rho, gen, p: gen_barabasi_albert(n, rho, gen),
    "ws": lambda n, rho, gen, p: gen_watts_strogatz(n, rho, gen, p),
}


def gen_topology(graph_type: str, n: int, rho: float, rng, *, p_rewire: float = DEFAULT_P_REWIRE,
                 connected: bool = True, max_tries: int = 2000) -> GraphTopology:
    """Draw a topology of the given family, resampling until connected if asked."""
    try:
        make = _GENERATORS[graph_type]
    except KeyError:
        raise ValueError(f"unknown graph type {graph_type!r}; expected one of {GRAPH_TYPES}") from None
    gen = _as_generator(rng)
    for _ in range(max_tries):
        g = make(n, rho, gen, p_rewire)
        if not connected or g.is_connected():
            return g
    raise RuntimeError(f"no connected {graph_type} graph after {max_tries} draws (n={n}, rho={rho})")


def edge_weight(a, b):
    """Symmetric similarity kernel ``exp(-|a - b|)``."""
    return np.exp(-np.abs(np.subtract(a, b)))


def assign_weights(g: GraphTopology, y_noisy) -> SimilarityMatrix:
    y = np.asarray(y_noisy, dtype=float)
    if y.shape != (g.n,):
        raise DimensionMismatchError(f"attribute vector has shape {y.shape}, graph has {g.n} vertices")
    W = g.adjacency() * edge_weight(y[:, None], y[None, :])
    return SimilarityMatrix(W)
