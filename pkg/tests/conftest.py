"""Independent reference implementations used as test oracles.

Nothing here imports the package's transport or curvature code: distances
come from networkx, transport from scipy's HiGHS LP solver.
"""

import math

import networkx as nx
import numpy as np
import pytest
from scipy.optimize import linprog


def to_nx(g):
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    for (u, v), w in zip(g.edges, g.weights):
        G.add_edge(int(u), int(v), weight=float(w))
    return G


def lp_transport(a, b, cost):
    """Earth mover's distance as a dense LP."""
    a, b, cost = np.asarray(a, float), np.asarray(b, float), np.asarray(cost, float)
    m, n = cost.shape
    A_eq = np.zeros((m + n, m * n))
    for i in range(m):
        A_eq[i, i * n:(i + 1) * n] = 1.0
    for j in range(n):
        A_eq[m + j, j::n] = 1.0
    res = linprog(cost.ravel(), A_eq=A_eq, b_eq=np.concatenate([a, b]),
                  bounds=(0, None), method="highs")
    assert res.status == 0, res.message
    return res.fun


def reference_measure(G, v, alpha=0.0):
    nbrs = sorted(G[v])
    if not nbrs:
        return {v: 1.0}
    raw = [math.exp(-G[v][x]["weight"]) for x in nbrs]
    total = sum(raw)
    mu = {x: (1 - alpha) * r / total for x, r in zip(nbrs, raw)}
    if alpha > 0:
        mu[v] = mu.get(v, 0.0) + alpha
    return mu


def reference_orc(g, u, v, alpha=0.0, G=None, dist=None):
    """Curvature by brute force: definition-level measures, all-pairs
    shortest paths, LP transport."""
    G = G if G is not None else to_nx(g)
    dist = dist if dist is not None else dict(nx.all_pairs_dijkstra_path_length(G))
    mu, nu = reference_measure(G, u, alpha), reference_measure(G, v, alpha)
    xs, ys = sorted(mu), sorted(nu)
    cost = np.array([[dist[x][y] for y in ys] for x in xs])
    w1 = lp_transport([mu[x] for x in xs], [nu[y] for y in ys], cost)
    return 1.0 - w1 / G[u][v]["weight"]


def random_connected_graph(rng, n, p, weighted):
    """Rejection-sampled connected G(n, p) as an edge list."""
    while True:
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
        G = nx.Graph()
        G.add_nodes_from(range(n))
        G.add_edges_from(edges)
        if nx.is_connected(G):
            break
    if weighted:
        return [(i, j, float(rng.uniform(0.5, 2.0))) for i, j in edges]
    return [(i, j, 1.0) for i, j in edges]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
