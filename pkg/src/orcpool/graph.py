"""Weighted, optionally attributed undirected graphs and synthetic generators."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .errors import ParameterError, StateError, ValidationError

EdgeType = int
BRIDGE, HUB_INTERNAL, INTERNAL = 1, 2, 3


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected graph with strictly positive edge weights.

    Edges are stored once, under the canonical key ``(min(u, v), max(u, v))``,
    sorted lexicographically. ``weights[i]`` belongs to ``edges[i]``.
    """

    n: int
    edges: np.ndarray
    weights: np.ndarray
    attributes: Optional[np.ndarray] = None
    labels: Optional[np.ndarray] = None

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    @cached_property
    def csr(self) -> sp.csr_matrix:
        """Symmetric weighted adjacency in CSR form."""
        u, v = self.edges[:, 0], self.edges[:, 1]
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        data = np.concatenate([self.weights, self.weights])
        mat = sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))
        mat.sort_indices()
        return mat

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {(int(u), int(v)): i for i, (u, v) in enumerate(self.edges)}

    def neighbors(self, v: int) -> np.ndarray:
        csr = self.csr
        return csr.indices[csr.indptr[v]:csr.indptr[v + 1]]

    def neighbor_weights(self, v: int) -> np.ndarray:
        csr = self.csr
        return csr.data[csr.indptr[v]:csr.indptr[v + 1]]

    def degrees(self) -> np.ndarray:
        """Unweighted degree vector."""
        return np.diff(self.csr.indptr)

    def weighted_degrees(self) -> np.ndarray:
        return np.asarray(self.csr.sum(axis=1)).ravel()

    def weight(self, u: int, v: int) -> float:
        key = (u, v) if u < v else (v, u)
        try:
            return float(self.weights[self.edge_index[key]])
        except KeyError:
            raise ValidationError(f"edge ({u}, {v}) not in graph") from None

    def adjacency(self) -> np.ndarray:
        """Dense weighted adjacency matrix."""
        return self.csr.toarray()

    def with_weights(self, weights: np.ndarray) -> "Graph":
        weights = np.asarray(weights, dtype=float)
        if weights.shape != self.weights.shape:
            raise ValidationError(
                f"expected {self.weights.shape[0]} weights, got {weights.shape}"
            )
        if not np.all(weights > 0):
            bad = int(np.argmin(weights > 0))
            raise ValidationError(
                f"nonpositive weight {weights[bad]} on edge {tuple(self.edges[bad])}"
            )
        return dataclasses.replace(self, weights=weights.copy())

    def with_labels(self, labels: Optional[Sequence[int]]) -> "Graph":
        return dataclasses.replace(self, labels=_check_labels(labels, self.n))

    def permute(self, perm: Sequence[int]) -> "Graph":
        """Relabel node ``i`` as ``perm[i]``."""
        perm = np.asarray(perm, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.n)):
            raise ValidationError("perm must be a permutation of range(n)")
        edges = [(int(perm[u]), int(perm[v]), float(w))
                 for (u, v), w in zip(self.edges, self.weights)]
        inv = np.argsort(perm)
        attrs = None if self.attributes is None else self.attributes[inv]
        labels = None if self.labels is None else self.labels[inv]
        return build_graph(edges, self.n, attrs, labels)


def _check_labels(labels, n: int) -> Optional[np.ndarray]:
    if labels is None:
        return None
    labels = np.asarray(labels)
    if labels.shape != (n,):
        raise ValidationError(f"labels must have length {n}, got shape {labels.shape}")
    if labels.size and (not np.issubdtype(labels.dtype, np.integer) or labels.min() < 0):
        raise ValidationError("labels must be nonnegative integers")
    return labels.astype(np.int64)


def build_graph(
    edges: Iterable[Sequence],
    n: int,
    attributes: Optional[np.ndarray] = None,
    labels: Optional[Sequence[int]] = None,
) -> Graph:
    """Validate an edge list and build a :class:`Graph`.

    Each edge is ``(u, v)`` or ``(u, v, weight)``; weight defaults to 1.
    Raises :class:`ValidationError` naming the offending edge or row.
    """
    n = int(n)
    if n < 0:
        raise ValidationError(f"node count must be nonnegative, got {n}")
    seen: dict[tuple[int, int], float] = {}
    for e in edges:
        if len(e) not in (2, 3):
            raise ValidationError(f"edge {tuple(e)} must be (u, v) or (u, v, w)")
        u, v = int(e[0]), int(e[1])
        w = float(e[2]) if len(e) == 3 else 1.0
        if not (0 <= u < n and 0 <= v < n):
            raise ValidationError(f"edge ({u}, {v}) has endpoint outside [0, {n})")
        if u == v:
            raise ValidationError(f"self-loop on node {u}")
        if not (w > 0 and np.isfinite(w)):
            raise ValidationError(f"nonpositive or non-finite weight {w} on edge ({u}, {v})")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise ValidationError(f"duplicate edge {key}")
        seen[key] = w

    keys = sorted(seen)
    edge_arr = np.array(keys, dtype=np.int64).reshape(-1, 2)
    weight_arr = np.array([seen[k] for k in keys], dtype=float)

    if attributes is not None:
        attributes = np.asarray(attributes)
        if attributes.ndim == 1:
            attributes = attributes[:, None]
        if attributes.ndim != 2 or attributes.shape[0] != n:
            raise ValidationError(
                f"attribute matrix has {attributes.shape[0] if attributes.ndim else 0} rows, "
                f"expected {n}"
            )
    return Graph(n, edge_arr, weight_arr, attributes, _check_labels(labels, n))


def shortest_path_distances(
    g: Graph, source: int, radius: Optional[float] = None
) -> dict[int, float]:
    """Weighted single-source distances, omitting unreachable nodes and nodes
    farther than ``radius``."""
    if not 0 <= source < g.n:
        raise ValidationError(f"source {source} outside [0, {g.n})")
    limit = np.inf if radius is None else float(radius)
    dist = dijkstra(g.csr, directed=False, indices=source, limit=limit)
    reach = np.flatnonzero(np.isfinite(dist))
    return {int(i): float(dist[i]) for i in reach}


def attribute_similarity_weights(g: Graph, tol: float = 1e-9) -> Graph:
    """Replace each edge weight by ``(1 + #mismatched attributes) / (m + 1)``.

    Integer and categorical attributes are compared exactly; real-valued
    attributes count as different when they differ by more than ``tol``.
    """
    if g.attributes is None:
        raise StateError("graph has no node attributes")
    x = g.attributes
    m = x.shape[1]
    xu, xv = x[g.edges[:, 0]], x[g.edges[:, 1]]
    if np.issubdtype(x.dtype, np.floating):
        mismatch = np.abs(xu - xv) > tol
    else:
        mismatch = xu != xv
    weights = (1.0 + mismatch.sum(axis=1)) / (m + 1.0)
    return g.with_weights(weights)


def generate_gab(a: int, b: int) -> tuple[Graph, np.ndarray, np.ndarray]:
    """Model graph of ``b`` cliques on ``a + 1`` nodes whose hubs form a ``K_b``.

    Node ``c * (a + 1)`` is the hub of cluster ``c``. Returns the graph, the
    cluster labels and a per-edge type: 1 for hub-hub bridges, 2 for
    hub-incident internal edges, 3 for the remaining internal edges.
    """
    if b < 2 or a < b:
        raise ParameterError(f"G_(a,b) requires a >= b >= 2, got a={a}, b={b}")
    size = a + 1
    hubs = [c * size for c in range(b)]
    edges = []
    for c in range(b):
        nodes = range(c * size, (c + 1) * size)
        edges.extend((i, j) for i in nodes for j in nodes if i < j)
    edges.extend((h1, h2) for h1 in hubs for h2 in hubs if h1 < h2)
    labels = np.repeat(np.arange(b), size)
    g = build_graph(edges, b * size, labels=labels)

    hub_mask = np.zeros(g.n, dtype=bool)
    hub_mask[hubs] = True
    n_hub_ends = hub_mask[g.edges].sum(axis=1)
    types = np.choose(n_hub_ends, [INTERNAL, HUB_INTERNAL, BRIDGE]).astype(np.int64)
    return g, labels, types


def generate_sbm(
    block_sizes: Sequence[int], p_in: float, p_out: float, seed: int = 0
) -> tuple[Graph, np.ndarray, np.ndarray]:
    """Sample a stochastic block model with unit edge weights.

    Returns ``(graph, labels, isolated)`` where ``isolated`` lists nodes with
    no incident edge (allowed, but worth knowing about).
    """
    if len(block_sizes) == 0:
        raise ParameterError("block_sizes must not be empty")
    if any(int(s) < 1 for s in block_sizes):
        raise ParameterError(f"block sizes must be positive, got {list(block_sizes)}")
    if not 0.0 <= p_out <= p_in <= 1.0:
        raise ParameterError(f"need 0 <= p_out <= p_in <= 1, got p_in={p_in}, p_out={p_out}")
    labels = np.repeat(np.arange(len(block_sizes)), [int(s) for s in block_sizes])
    n = labels.size
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    prob = np.where(labels[iu] == labels[ju], p_in, p_out)
    keep = rng.random(iu.size) < prob
    edges = np.column_stack([iu[keep], ju[keep]]).tolist()
    g = build_graph(edges, n, labels=labels)
    isolated = np.flatnonzero(g.degrees() == 0)
    return g, labels, isolated


def generate_dumbbell(clique_size: int, bridge_count: int = 1) -> tuple[Graph, np.ndarray]:
    """Two cliques joined by ``bridge_count`` disjoint bridges ``(i, clique_size + i)``."""
    if clique_size < 2:
        raise ParameterError(f"clique_size must be >= 2, got {clique_size}")
    if bridge_count < 1 or bridge_count > clique_size:
        raise ParameterError(
            f"bridge_count must be in [1, clique_size={clique_size}], got {bridge_count}"
        )
    k = clique_size
    edges = [(i, j) for i in range(k) for j in range(i + 1, k)]
    edges += [(k + i, k + j) for i in range(k) for j in range(i + 1, k)]
    edges += [(i, k + i) for i in range(bridge_count)]
    labels = np.repeat([0, 1], k)
    return build_graph(edges, 2 * k, labels=labels), labels


def erdos_renyi(n: int, p: float, seed: int = 0, weights: str = "unit") -> Graph:
    """G(n, p) with unit weights, or uniform weights in [0.5, 2) if ``weights='random'``."""
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    iu, ju = iu[keep], ju[keep]
    if weights == "random":
        w = rng.uniform(0.5, 2.0, size=iu.size)
    else:
        w = np.ones(iu.size)
    return build_graph(zip(iu.tolist(), ju.tolist(), w.tolist()), n)
