"""ORC-Pool: curvature-guided selection, reduction and connection.

Selection maximizes the relaxed min-cut objective on the curvature-adjusted
adjacency ``C_T``, either spectrally (top-K eigenvectors + k-means) or with a
trained soft-assignment head (see :mod:`orcpool.soft`).
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from .errors import NumericError, ParameterError, ValidationError
from .flow import CurvatureAdjustedAdjacency, ricci_flow
from .graph import Graph, attribute_similarity_weights, build_graph

log = logging.getLogger(__name__)

Matrix = Union[np.ndarray, sp.spmatrix, CurvatureAdjustedAdjacency, Graph]


@dataclass(frozen=True)
class Assignment:
    """Node-to-supernode map as an ``N x K`` row-stochastic matrix."""

    S: np.ndarray
    empty_clusters: tuple[int, ...] = ()

    def __post_init__(self):
        S = np.asarray(self.S, dtype=float)
        if S.ndim != 2:
            raise ValidationError(f"assignment must be 2-D, got shape {S.shape}")
        if (S < 0).any() or not np.allclose(S.sum(axis=1), 1.0, rtol=0, atol=1e-9):
            raise ValidationError("assignment rows must be nonnegative and sum to 1")
        object.__setattr__(self, "S", S)

    @property
    def K(self) -> int:
        return self.S.shape[1]

    @property
    def is_hard(self) -> bool:
        return bool(np.all((self.S == 0) | (self.S == 1)))

    @property
    def labels(self) -> np.ndarray:
        return np.argmax(self.S, axis=1)

    @classmethod
    def from_labels(cls, labels: Sequence[int], K: Optional[int] = None) -> "Assignment":
        labels = np.asarray(labels, dtype=np.int64)
        K = int(labels.max()) + 1 if K is None else K
        S = np.zeros((labels.size, K))
        S[np.arange(labels.size), labels] = 1.0
        empty = tuple(int(k) for k in np.flatnonzero(S.sum(axis=0) == 0))
        return cls(S, empty)


@dataclass(frozen=True)
class CoarsenedGraph:
    """Result of one pooling level.

    ``adjacency`` is the full ``S^T A S`` including the intra-cluster mass on
    its diagonal; ``graph`` is the coarse graph without self-loops, with edge
    weights re-initialized (attribute similarity, else 1).
    """

    graph: Graph
    attributes: Optional[np.ndarray]
    adjacency: np.ndarray
    assignment: Assignment
    provenance: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return self.graph.n

    @property
    def intra_mass(self) -> np.ndarray:
        return np.diag(self.adjacency).copy()


def _as_dense(M: Matrix) -> np.ndarray:
    if isinstance(M, CurvatureAdjustedAdjacency):
        return M.dense()
    if isinstance(M, Graph):
        return M.adjacency()
    if sp.issparse(M):
        return M.toarray()
    return np.asarray(M, dtype=float)


def normalized_adjacency(M: Matrix) -> np.ndarray:
    """``D^{-1/2} M D^{-1/2}``; a node with zero degree gets an identity row."""
    A = _as_dense(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"adjacency must be square, got {A.shape}")
    deg = A.sum(axis=1)
    isolated = deg <= 0
    inv_sqrt = 1.0 / np.sqrt(np.where(isolated, 1.0, deg))
    out = A * inv_sqrt[:, None] * inv_sqrt[None, :]
    idx = np.flatnonzero(isolated)
    out[idx, idx] = 1.0
    return out


def top_eigenpairs(M: np.ndarray, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Largest ``K`` eigenpairs of a symmetric matrix, eigenvalues descending.

    Each eigenvector's first component above 1e-12 in magnitude is made
    positive, so the output does not depend on LAPACK's sign choice.
    """
    M = np.asarray(M, dtype=float)
    try:
        vals, vecs = np.linalg.eigh(0.5 * (M + M.T))
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"symmetric eigensolver failed on a {M.shape} matrix: {exc}") from exc
    order = np.argsort(-vals, kind="stable")[:K]
    vals, vecs = vals[order], vecs[:, order]
    for k in range(vecs.shape[1]):
        nz = np.flatnonzero(np.abs(vecs[:, k]) > 1e-12)
        if nz.size and vecs[nz[0], k] < 0:
            vecs[:, k] = -vecs[:, k]
    return vals, vecs


def _kmeans_pp(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    first = int(rng.integers(n))
    centers[0] = X[first]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers[c] = X[idx]
        d2 = np.minimum(d2, ((X - centers[c]) ** 2).sum(axis=1))
    return centers


def _sq_dists(X: np.ndarray, centers: np.ndarray) -> np.ndarray:
    return ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)


def kmeans(
    X: np.ndarray, k: int, restarts: int = 10, seed: int = 0, max_iter: int = 100
) -> np.ndarray:
    """Lloyd's algorithm with k-means++ seeding; best of ``restarts`` by SSE.

    Distance ties go to the lower cluster index. Clusters are renumbered in
    order of first appearance, so node 0 is always in cluster 0.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ParameterError(f"k must be in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    best_sse, best = np.inf, None
    for _ in range(max(1, restarts)):
        centers = _kmeans_pp(X, k, rng)
        labels = np.full(n, -1)
        for _ in range(max_iter):
            d2 = _sq_dists(X, centers)
            new = np.argmin(d2, axis=1)
            counts = np.bincount(new, minlength=k)
            for c in np.flatnonzero(counts == 0):
                # reseed an empty cluster at the point worst served so far
                far = int(np.argmax(d2[np.arange(n), new]))
                new[far] = c
                d2[far] = 0.0
                counts = np.bincount(new, minlength=k)
            if np.array_equal(new, labels):
                break
            labels = new
            for c in range(k):
                centers[c] = X[labels == c].mean(axis=0)
        sse = float(((X - centers[labels]) ** 2).sum())
        if sse < best_sse:
            best_sse, best = sse, labels.copy()
    _, first = np.unique(best, return_index=True)
    remap = np.empty(k, dtype=np.int64)
    remap[best[np.sort(first)]] = np.arange(first.size)
    return remap[best]


def spectral_clustering(M: Matrix, K: int, restarts: int = 10, seed: int = 0) -> np.ndarray:
    """Cluster labels from k-means on the top-``K`` eigenvectors of the
    normalized matrix."""
    A_hat = normalized_adjacency(M)
    n = A_hat.shape[0]
    if not 1 <= K <= n:
        raise ParameterError(f"K must be in [1, {n}], got {K}")
    _, U = top_eigenpairs(A_hat, K)
    return kmeans(U, K, restarts=restarts, seed=seed)


def spectral_select(
    C: Matrix, K: int, kmeans_restarts: int = 10, seed: int = 0
) -> Assignment:
    """Hard assignment from the spectral relaxation of the min-cut objective."""
    n = _as_dense(C).shape[0]
    if K < 2 or K > n:
        raise ParameterError(f"spectral selection needs 2 <= K <= N={n}, got K={K}")
    labels = spectral_clustering(C, K, kmeans_restarts, seed)
    return Assignment.from_labels(labels, K)


def _S(S) -> np.ndarray:
    return S.S if isinstance(S, Assignment) else np.asarray(S, dtype=float)


def mincut_loss(S, C: Matrix) -> float:
    """``-tr(S^T C_hat S) / tr(S^T D_hat S)`` with ``C_hat`` the normalized
    ``C`` and ``D_hat`` its degree matrix. Lies in ``[-1, 0]``."""
    S = _S(S)
    C_hat = normalized_adjacency(C)
    d_hat = C_hat.sum(axis=1)
    num = np.einsum("ik,ij,jk->", S, C_hat, S)
    den = float((d_hat[:, None] * S * S).sum())
    if den <= 0:
        raise NumericError("min-cut denominator is zero (all-zero assignment or empty graph)")
    return -num / den


def orthogonality_penalty(S) -> float:
    """``|| S^T S / ||S^T S||_F - I_K / sqrt(K) ||_F``, in ``[0, 2]``."""
    S = _S(S)
    G = S.T @ S
    norm = np.linalg.norm(G)
    K = S.shape[1]
    if norm == 0:
        return float(np.linalg.norm(np.eye(K) / np.sqrt(K)))
    return float(np.linalg.norm(G / norm - np.eye(K) / np.sqrt(K)))


def harden(S) -> Assignment:
    """Row-wise argmax (ties to the lower cluster); reports empty clusters."""
    S = _S(S)
    return Assignment.from_labels(np.argmax(S, axis=1), S.shape[1])


def reduce_and_connect(S, g: Graph, attribute_tol: float = 1e-9) -> CoarsenedGraph:
    """Pool node attributes with ``S^T X`` and edges with ``S^T A S``.

    Empty supernodes are dropped (with a warning). Coarse edges are the
    nonzero off-diagonal entries of ``S^T A S``; their weights are
    re-initialized from supernode attribute similarity when attributes exist,
    otherwise set to 1.
    """
    assignment = S if isinstance(S, Assignment) else Assignment(np.asarray(S, dtype=float))
    if not assignment.is_hard:
        assignment = harden(assignment)
    mat = assignment.S
    if mat.shape[0] != g.n:
        raise ValidationError(f"assignment has {mat.shape[0]} rows, graph has {g.n} nodes")
    keep = mat.sum(axis=0) > 0
    if not keep.all():
        dropped = np.flatnonzero(~keep).tolist()
        warnings.warn(f"dropping empty supernodes {dropped}", RuntimeWarning, stacklevel=2)
        mat = mat[:, keep]
        assignment = Assignment(mat)
    K = mat.shape[1]

    labels = assignment.labels
    AP = np.zeros((K, K))
    lu, lv = labels[g.edges[:, 0]], labels[g.edges[:, 1]]
    np.add.at(AP, (lu, lv), g.weights)
    np.add.at(AP, (lv, lu), g.weights)

    XP = None if g.attributes is None else mat.T @ g.attributes
    iu, ju = np.nonzero(np.triu(AP, k=1))
    coarse = build_graph(zip(iu.tolist(), ju.tolist()), K, XP)
    if XP is not None and coarse.num_edges:
        coarse = attribute_similarity_weights(coarse, tol=attribute_tol)
    return CoarsenedGraph(coarse, XP, AP, assignment)


@dataclass
class PoolConfig:
    """Knobs shared by :func:`pool` and :func:`hierarchical_pool`."""

    method: str = "exact"
    alpha: float = 0.0
    seed: int = 0
    kmeans_restarts: int = 10
    epochs: int = 500
    lr: float = 1e-3
    hidden: int = 16
    embed: int = 8
    features: str = "auto"
    workers: int = 1
    normalization: str = "sum"


def pool(
    g: Graph,
    K: int,
    T: int = 4,
    mode: str = "spectral",
    config: Optional[PoolConfig] = None,
) -> CoarsenedGraph:
    """Ricci flow, then selection, then reduction and connection."""
    config = config or PoolConfig()
    if K < 1 or K > max(g.n, 1):
        raise ParameterError(f"K must be in [1, {g.n}], got {K}")
    if mode not in ("spectral", "trained"):
        raise ParameterError(f"mode must be 'spectral' or 'trained', got {mode!r}")
    C = ricci_flow(g, T, method=config.method, alpha=config.alpha,
                   normalization=config.normalization, workers=config.workers)
    extra: dict = {}
    if K == 1:
        assignment = Assignment(np.ones((g.n, 1)))
    elif mode == "spectral":
        assignment = spectral_select(C, K, config.kmeans_restarts, config.seed)
    else:
        from .soft import train_soft_assignment

        soft, state = train_soft_assignment(
            g, C, K, epochs=config.epochs, lr=config.lr, seed=config.seed,
            hidden=config.hidden, embed=config.embed, features=config.features)
        assignment = harden(soft)
        extra["final_loss"] = float(state.loss_trace[-1])
    out = reduce_and_connect(assignment, g)
    provenance = dict(T=T, K=K, mode=mode, seed=config.seed, method=config.method,
                      alpha=config.alpha, **extra)
    return CoarsenedGraph(out.graph, out.attributes, out.adjacency, out.assignment, provenance)


def hierarchical_pool(
    g: Graph,
    Ks: Sequence[int],
    T: int = 4,
    mode: str = "spectral",
    config: Optional[PoolConfig] = None,
) -> list[CoarsenedGraph]:
    """Pool repeatedly, re-running the flow on each coarse graph."""
    Ks = [int(k) for k in Ks]
    if not Ks or any(k < 1 for k in Ks):
        raise ParameterError(f"Ks must be a non-empty list of positive integers, got {Ks}")
    if any(b >= a for a, b in zip(Ks, Ks[1:])):
        raise ParameterError(f"Ks must be strictly decreasing, got {Ks}")
    levels = []
    current = g
    for K in Ks:
        level = pool(current, min(K, current.n), T, mode, config)
        levels.append(level)
        current = level.graph
    return levels
