"""Ollivier-Ricci curvature on edges.

Three methods share one neighborhood measure and one local ground metric:

* ``exact``: earth mover's distance by min-cost flow,
* ``sinkhorn``: entropic approximation,
* ``combinatorial``: midpoint of closed-form lower and upper bounds, which
  needs no transport solve at all.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.sparse.csgraph import dijkstra

from .errors import ParameterError, ValidationError
from .graph import Graph
from .transport import sinkhorn, transport_exact

METHODS = ("exact", "sinkhorn", "combinatorial")


@dataclass(frozen=True)
class NeighborhoodMeasure:
    """Probability mass on a node and its 1-hop neighbors."""

    anchor: int
    nodes: np.ndarray
    masses: np.ndarray
    alpha: float

    def as_dict(self) -> dict[int, float]:
        return {int(x): float(m) for x, m in zip(self.nodes, self.masses)}


@dataclass(frozen=True)
class TransportPlan:
    flows: list[tuple[int, int, float]]
    cost: float


@dataclass(frozen=True)
class EdgeCurvatures:
    """Curvature per edge, aligned with ``edges`` (canonical order)."""

    edges: np.ndarray
    values: np.ndarray
    method: str
    bounds: Optional[np.ndarray] = None  # (E, 2): lower, upper

    def as_dict(self) -> dict[tuple[int, int], float]:
        return {(int(u), int(v)): float(k) for (u, v), k in zip(self.edges, self.values)}


def neighborhood_measure(g: Graph, v: int, alpha: float = 0.0) -> NeighborhoodMeasure:
    """Lazy one-step diffusion from ``v``.

    Mass ``alpha`` stays on ``v``; the rest goes to neighbors ``x`` in
    proportion to ``exp(-w_vx)``. An isolated node keeps all of its mass.
    """
    if not 0.0 <= alpha < 1.0:
        raise ParameterError(f"alpha must lie in [0, 1), got {alpha}")
    nbrs = g.neighbors(v)
    if nbrs.size == 0:
        return NeighborhoodMeasure(v, np.array([v]), np.array([1.0]), alpha)
    w = g.neighbor_weights(v)
    # shift by the minimum weight so exp() cannot underflow to all zeros
    b = np.exp(-(w - w.min()))
    masses = (1.0 - alpha) * b / math.fsum(b)
    if alpha > 0:
        nodes = np.append(nbrs, v)
        masses = np.append(masses, alpha)
        order = np.argsort(nodes)
        return NeighborhoodMeasure(v, nodes[order], masses[order], alpha)
    return NeighborhoodMeasure(v, nbrs.copy(), masses, alpha)


def _local_radius(g: Graph, u: int, v: int) -> float:
    wu = g.neighbor_weights(u).max()
    wv = g.neighbor_weights(v).max()
    r = max(2 * wu, 2 * wv, wu + g.weight(u, v) + wv)
    return r * (1 + 1e-12)


def _endpoint_routes(cache: "_NodeCache", u: int, v: int, nodes) -> tuple[np.ndarray, np.ndarray]:
    """Upper bounds on d(x, u) and d(x, v) for nodes in N(u) | N(v) | {u, v}."""
    wu, wv = cache.nbr_weights(u), cache.nbr_weights(v)
    w_uv = wu[v]
    du = np.empty(len(nodes))
    dv = np.empty(len(nodes))
    for k, x in enumerate(nodes):
        x = int(x)
        a = 0.0 if x == u else wu.get(x, math.inf)
        b = 0.0 if x == v else wv.get(x, math.inf)
        du[k] = min(a, b + w_uv)
        dv[k] = min(b, a + w_uv)
    return du, dv


def _limit(x: float) -> float:
    return x * (1 + 1e-12) + 1e-300


def ground_distances(g: Graph, nodes: Sequence[int], limit: Optional[float] = None) -> np.ndarray:
    """Shortest-path distances between ``nodes`` (square matrix).

    With ``limit`` set, Dijkstra stops exploring past that radius and pairs
    farther apart come back as ``inf``.
    """
    nodes = np.asarray(nodes, dtype=np.int64)
    lim = np.inf if limit is None else limit
    dist = dijkstra(g.csr, directed=True, indices=nodes, limit=lim)
    return dist[:, nodes]


def _rank(keys: list) -> list[int]:
    table = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [table[k] for k in keys]


def _invariant_order(row_mass: np.ndarray, col_mass: np.ndarray, dist: np.ndarray):
    """Row and column orders that depend only on masses and distances.

    The transport solvers accumulate in index order, so an order that ignores
    node ids gives identical rounding under any relabeling of the graph.
    Rows and columns are split into classes by mass, then the classes are
    refined against each other until stable; any remaining ties are
    symmetric, so their order does not matter.
    """
    d = dist.tolist()
    dT = dist.T.tolist()
    rc = _rank(row_mass.tolist())
    cc = _rank(col_mass.tolist())
    while True:
        new_rc = _rank([(rc[i], tuple(sorted(zip(d[i], cc)))) for i in range(len(rc))])
        new_cc = _rank([(cc[j], tuple(sorted(zip(dT[j], rc)))) for j in range(len(cc))])
        if len(set(new_rc)) == len(set(rc)) and len(set(new_cc)) == len(set(cc)):
            break
        rc, cc = new_rc, new_cc
    rows = sorted(range(len(rc)), key=rc.__getitem__)
    cols = sorted(range(len(cc)), key=cc.__getitem__)
    return np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64)


def _side_key(rows: np.ndarray, cols: np.ndarray, dist: np.ndarray) -> list:
    d = dist.tolist()
    cm = cols.tolist()
    return sorted((m, sorted(zip(d[i], cm))) for i, m in enumerate(rows.tolist()))


def _on_support(mu: NeighborhoodMeasure, support: np.ndarray) -> np.ndarray:
    out = np.zeros(support.size)
    out[np.searchsorted(support, mu.nodes)] = mu.masses
    return out


class _NodeCache:
    """Per-node measures and neighbor-weight maps, memoized for one graph."""

    def __init__(self, g: Graph, alpha: float):
        self.g = g
        self.alpha = alpha
        self._mu: dict[int, NeighborhoodMeasure] = {}
        self._mu_dict: dict[int, dict[int, float]] = {}
        self._w: dict[int, dict[int, float]] = {}

    def measure(self, v: int) -> NeighborhoodMeasure:
        mu = self._mu.get(v)
        if mu is None:
            mu = self._mu[v] = neighborhood_measure(self.g, v, self.alpha)
        return mu

    def measure_dict(self, v: int) -> dict[int, float]:
        d = self._mu_dict.get(v)
        if d is None:
            d = self._mu_dict[v] = self.measure(v).as_dict()
        return d

    def nbr_weights(self, v: int) -> dict[int, float]:
        d = self._w.get(v)
        if d is None:
            g = self.g
            d = self._w[v] = dict(zip(g.neighbors(v).tolist(), g.neighbor_weights(v).tolist()))
        return d


def _edge_setup(g: Graph, u: int, v: int, alpha: float, cache: Optional[_NodeCache] = None):
    cache = cache or _NodeCache(g, alpha)
    mu_u = cache.measure(u)
    mu_v = cache.measure(v)
    support = np.union1d(mu_u.nodes, mu_v.nodes)
    return mu_u, mu_v, support, _on_support(mu_u, support), _on_support(mu_v, support)


def _resolve_ground(mu1, mu2, ground):
    support = np.union1d(mu1.nodes, mu2.nodes)
    if isinstance(ground, Graph):
        return support, ground_distances(ground, support)
    nodes, dist = ground
    nodes = np.asarray(nodes)
    dist = np.asarray(dist, dtype=float)
    pos = {int(x): i for i, x in enumerate(nodes)}
    try:
        idx = [pos[int(x)] for x in support]
    except KeyError as exc:
        raise ValidationError(f"ground metric lacks support node {exc.args[0]}") from None
    return support, dist[np.ix_(idx, idx)]


def wasserstein1_exact(
    mu1: NeighborhoodMeasure, mu2: NeighborhoodMeasure, ground
) -> tuple[float, TransportPlan]:
    """Exact W1 between two measures.

    ``ground`` is either a :class:`Graph` (shortest-path metric) or a pair
    ``(nodes, matrix)`` of distances covering the union of both supports.
    """
    support, dist = _resolve_ground(mu1, mu2, ground)
    res = transport_exact(_on_support(mu1, support), _on_support(mu2, support), dist)
    ii, jj = np.nonzero(res.plan)
    flows = [(int(support[i]), int(support[j]), float(res.plan[i, j])) for i, j in zip(ii, jj)]
    return res.cost, TransportPlan(flows, res.cost)


def wasserstein1_sinkhorn(
    mu1: NeighborhoodMeasure,
    mu2: NeighborhoodMeasure,
    ground,
    epsilon: float = 1e-3,
    max_iter: int = 10_000,
    tol: float = 1e-9,
):
    """Entropic W1 approximation; returns a :class:`~orcpool.transport.SinkhornResult`."""
    support, dist = _resolve_ground(mu1, mu2, ground)
    return sinkhorn(_on_support(mu1, support), _on_support(mu2, support), dist,
                     epsilon=epsilon, max_iter=max_iter, tol=tol)


def _canonical_edge(g: Graph, e) -> tuple[int, int]:
    u, v = int(e[0]), int(e[1])
    key = (u, v) if u < v else (v, u)
    if key not in g.edge_index:
        raise ValidationError(f"edge {tuple(e)} not in graph")
    return key


def _exact_w1(g: Graph, u: int, v: int, alpha: float, cache=None) -> float:
    _, _, support, a, b = _edge_setup(g, u, v, alpha, cache)
    # W1 only sees the signed difference of the two measures
    diff = a - b
    pos = np.flatnonzero(diff > 0)
    neg = np.flatnonzero(diff < 0)
    if pos.size == 0 or neg.size == 0:
        return 0.0
    cache = cache or _NodeCache(g, alpha)
    du, dv = _endpoint_routes(cache, u, v, support)
    radius = np.minimum(du[pos, None] + du[None, neg], dv[pos, None] + dv[None, neg]).max()
    lim = _limit(radius)
    a, b = diff[pos], -diff[neg]
    # which side ships mass must not depend on which endpoint has the smaller id
    key_a, key_b = sorted(a.tolist()), sorted(b.tolist())
    if key_a == key_b:
        fwd = dijkstra(g.csr, directed=True, indices=support[pos], limit=lim)[:, support[neg]]
        bwd = dijkstra(g.csr, directed=True, indices=support[neg], limit=lim)[:, support[pos]]
        dist = np.minimum(fwd, bwd.T)
        if _side_key(b, a, dist.T) < _side_key(a, b, dist):
            a, b, dist = b, a, dist.T
    else:
        if key_b < key_a:
            pos, neg, a, b = neg, pos, b, a
        dist = dijkstra(g.csr, directed=True, indices=support[pos], limit=lim)[:, support[neg]]
    ri, ci = _invariant_order(a, b, dist)
    return transport_exact(a[ri], b[ci], dist[np.ix_(ri, ci)]).cost


def _sinkhorn_w1(g: Graph, u: int, v: int, alpha: float, cache=None, **opts) -> float:
    _, _, support, a, b = _edge_setup(g, u, v, alpha, cache)
    dist = ground_distances(g, support, _local_radius(g, u, v))
    dist = np.minimum(dist, dist.T)
    if _side_key(b, a, dist) < _side_key(a, b, dist):
        a, b = b, a
    ri, ci = _invariant_order(a - b, b - a, dist)
    return sinkhorn(a[ri], b[ci], dist[np.ix_(ri, ci)], **opts).cost


def orc_edge(
    g: Graph,
    e,
    alpha: float = 0.0,
    method: str = "exact",
    epsilon: float = 1e-3,
    max_iter: int = 10_000,
    tol: float = 1e-9,
) -> float:
    """Curvature ``1 - W1(p_u, p_v) / w_uv`` of edge ``e = (u, v)``."""
    return _orc_edge(g, e, alpha, method, None, epsilon=epsilon, max_iter=max_iter, tol=tol)


def _orc_edge(g, e, alpha, method, cache, **opts) -> float:
    u, v = _canonical_edge(g, e)
    if method == "exact":
        w1 = _exact_w1(g, u, v, alpha, cache)
    elif method == "sinkhorn":
        w1 = _sinkhorn_w1(g, u, v, alpha, cache, **opts)
    elif method == "combinatorial":
        return _orc_bounds(g, (u, v), alpha, cache)[2]
    else:
        raise ParameterError(f"unknown curvature method {method!r}; expected one of {METHODS}")
    return 1.0 - w1 / g.weight(u, v)


def orc_bounds(g: Graph, e, alpha: float = 0.0) -> tuple[float, float, float]:
    """Combinatorial lower and upper curvature bounds and their midpoint.

    The lower bound prices an explicit transport plan that routes all
    unshared mass through the edge; the upper bound charges every unit of
    surplus at least its distance to the nearest deficit node.
    """
    return _orc_bounds(g, e, alpha, None)


def _orc_bounds(g: Graph, e, alpha: float, cache: Optional[_NodeCache]):
    cache = cache or _NodeCache(g, alpha)
    u, v = _canonical_edge(g, e)
    w_uv = g.weight(u, v)
    pu = cache.measure_dict(u)
    pv = cache.measure_dict(v)
    wu = cache.nbr_weights(u)
    wv = cache.nbr_weights(v)
    nu = set(wu) - {v}
    nv = set(wv) - {u}

    terms = []
    for x in nu - nv:
        terms.append(wu[x] / w_uv * pu.get(x, 0.0))
    for x in nv - nu:
        terms.append(wv[x] / w_uv * pv.get(x, 0.0))
    deficit_c = []
    for x in nu & nv:
        d = pu.get(x, 0.0) - pv.get(x, 0.0)
        if d > 0:
            terms.append(wv[x] / w_uv * d)
        elif d < 0:
            terms.append(wu[x] / w_uv * -d)
            deficit_c.append(-d)
    # the crossing mass, counted from either endpoint; the two agree up to
    # rounding, and averaging keeps the bound symmetric in u and v
    cross_u = math.fsum([pu.get(x, 0.0) for x in nu - nv]
                        + [pu.get(u, 0.0), -pv.get(u, 0.0)] + [-d for d in deficit_c])
    surplus_c = [pu.get(x, 0.0) - pv.get(x, 0.0) for x in nu & nv]
    cross_v = math.fsum([pv.get(x, 0.0) for x in nv - nu]
                        + [pv.get(v, 0.0), -pu.get(v, 0.0)] + [-d for d in surplus_c if d > 0])
    cross = 0.5 * (abs(cross_u) + abs(cross_v))
    kappa_low = math.fsum([1.0, -cross] + [-t for t in terms])

    support = sorted(set(pu) | set(pv))
    diff = {x: pu.get(x, 0.0) - pv.get(x, 0.0) for x in support}
    surplus = [x for x in support if diff[x] > 0]
    deficit = [x for x in support if diff[x] < 0]
    if surplus and deficit:
        du, dv = _endpoint_routes(cache, u, v, support)
        is_sur = np.array([diff[x] > 0 for x in support])
        is_def = np.array([diff[x] < 0 for x in support])
        # nearest deficit (surplus) is no farther than the best route via u or v
        r_push = np.minimum(du[is_sur] + du[is_def].min(), dv[is_sur] + dv[is_def].min()).max()
        r_pull = np.minimum(du[is_def] + du[is_sur].min(), dv[is_def] + dv[is_sur].min()).max()
        to_def = dijkstra(g.csr, directed=True, indices=deficit, min_only=True,
                          limit=_limit(r_push))
        to_sur = dijkstra(g.csr, directed=True, indices=surplus, min_only=True,
                          limit=_limit(r_pull))
        push = math.fsum(to_def[x] * diff[x] for x in surplus) / w_uv
        pull = math.fsum(to_sur[x] * -diff[x] for x in deficit) / w_uv
        kappa_up = 1.0 - max(push, pull)
    else:
        kappa_up = 1.0
    return kappa_low, kappa_up, 0.5 * (kappa_low + kappa_up)


def _curvature_chunk(g: Graph, idx: np.ndarray, alpha: float, method: str, opts: dict):
    out = np.empty(idx.size)
    bounds = np.empty((idx.size, 2)) if method == "combinatorial" else None
    cache = _NodeCache(g, alpha)
    for k, i in enumerate(idx):
        u, v = (int(x) for x in g.edges[i])
        if method == "combinatorial":
            lo, up, mid = _orc_bounds(g, (u, v), alpha, cache)
            out[k] = mid
            bounds[k] = lo, up
        else:
            out[k] = _orc_edge(g, (u, v), alpha, method, cache, **opts)
    return out, bounds


def orc_all(
    g: Graph,
    alpha: float = 0.0,
    method: str = "exact",
    workers: int = 1,
    epsilon: float = 1e-3,
    max_iter: int = 10_000,
    tol: float = 1e-9,
) -> EdgeCurvatures:
    """Curvature of every edge, in canonical edge order.

    Edges are split into contiguous chunks across ``workers`` processes; each
    edge's value does not depend on which worker computed it, so the result
    is identical for any worker count.
    """
    if method not in METHODS:
        raise ParameterError(f"unknown curvature method {method!r}; expected one of {METHODS}")
    if workers < 1:
        raise ParameterError(f"workers must be >= 1, got {workers}")
    opts = {} if method != "sinkhorn" else dict(epsilon=epsilon, max_iter=max_iter, tol=tol)
    m = g.num_edges
    values = np.empty(m)
    bounds = np.empty((m, 2)) if method == "combinatorial" else None
    if m == 0:
        return EdgeCurvatures(g.edges.copy(), values, method, bounds)

    chunks = np.array_split(np.arange(m), min(workers, m))
    if workers == 1:
        results = [_curvature_chunk(g, chunks[0], alpha, method, opts)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_curvature_chunk, g, c, alpha, method, opts) for c in chunks]
            results = [f.result() for f in futures]
    for c, (vals, bnds) in zip(chunks, results):
        values[c] = vals
        if bounds is not None:
            bounds[c] = bnds
    return EdgeCurvatures(g.edges.copy(), values, method, bounds)
