import networkx as nx
import numpy as np
import pytest

from orcpool.errors import ParameterError, StateError, ValidationError
from orcpool.graph import (BRIDGE, HUB_INTERNAL, INTERNAL, attribute_similarity_weights,
                           build_graph, erdos_renyi, generate_dumbbell, generate_gab,
                           generate_sbm, shortest_path_distances)

from conftest import to_nx


def test_smallest_graph():
    g = build_graph([(0, 1, 1.0)], 2)
    assert g.num_edges == 1
    assert g.degrees().tolist() == [1, 1]


def test_triangle_is_symmetric():
    g = build_graph([(0, 1, 1), (1, 2, 1), (0, 2, 1)], 3)
    A = g.adjacency()
    assert np.array_equal(A, A.T)
    assert g.degrees().tolist() == [2, 2, 2]


def test_edges_are_canonical_and_sorted():
    g = build_graph([(2, 0, 1.5), (1, 0, 2.0)], 3)
    assert g.edges.tolist() == [[0, 1], [0, 2]]
    assert g.weight(2, 0) == 1.5 and g.weight(0, 1) == 2.0


@pytest.mark.parametrize("edges, n, match", [
    ([(0, 0, 1)], 1, "self-loop"),
    ([(0, 1, 0.0)], 2, "nonpositive"),
    ([(0, 1, -1.0)], 2, "nonpositive"),
    ([(0, 1), (1, 0)], 2, "duplicate"),
    ([(0, 5)], 3, "outside"),
])
def test_build_graph_rejects(edges, n, match):
    with pytest.raises(ValidationError, match=match):
        build_graph(edges, n)


def test_attribute_row_mismatch():
    with pytest.raises(ValidationError, match="rows"):
        build_graph([(0, 1)], 2, attributes=np.zeros((3, 2)))


def test_with_weights_rejects_nonpositive():
    g = build_graph([(0, 1), (1, 2)], 3)
    with pytest.raises(ValidationError):
        g.with_weights([1.0, 0.0])


def test_gab_three_three():
    g, labels, types = generate_gab(3, 3)
    assert g.n == 12 and g.num_edges == 21
    assert [(types == t).sum() for t in (BRIDGE, HUB_INTERNAL, INTERNAL)] == [3, 9, 9]
    assert labels.tolist() == [0] * 4 + [1] * 4 + [2] * 4


def test_gab_two_two():
    g, _, types = generate_gab(2, 2)
    assert g.n == 6
    assert [(types == t).sum() for t in (BRIDGE, HUB_INTERNAL, INTERNAL)] == [1, 4, 2]


@pytest.mark.parametrize("a, b", [(3, 4), (1, 1), (5, 1)])
def test_gab_precondition(a, b):
    with pytest.raises(ParameterError):
        generate_gab(a, b)


def test_gab_counts_exhaustive():
    for a in range(2, 9):
        for b in range(2, a + 1):
            g, labels, types = generate_gab(a, b)
            counts = [(types == t).sum() for t in (BRIDGE, HUB_INTERNAL, INTERNAL)]
            assert counts == [b * (b - 1) // 2, a * b, a * (a - 1) * b // 2]
            # every cluster is a clique on a+1 nodes
            G = to_nx(g)
            for c in range(b):
                nodes = np.flatnonzero(labels == c).tolist()
                assert G.subgraph(nodes).number_of_edges() == (a + 1) * a // 2


def test_sbm_degenerate_probabilities():
    g, labels, isolated = generate_sbm([3, 3], 1.0, 0.0, seed=0)
    assert g.num_edges == 6
    assert nx.number_connected_components(to_nx(g)) == 2
    assert isolated.size == 0


def test_sbm_deterministic():
    a = generate_sbm([25, 25], 0.3, 0.02, seed=7)[0]
    b = generate_sbm([25, 25], 0.3, 0.02, seed=7)[0]
    assert np.array_equal(a.edges, b.edges)


def test_sbm_single_block():
    g, labels, _ = generate_sbm([10], 0.5, 0.0, seed=1)
    assert labels.tolist() == [0] * 10


def test_sbm_flags_isolated_nodes():
    _, _, isolated = generate_sbm([4, 4], 0.0, 0.0, seed=0)
    assert isolated.tolist() == list(range(8))


@pytest.mark.parametrize("sizes, p_in, p_out", [([], 0.5, 0.1), ([3], 0.1, 0.5), ([0, 2], 0.5, 0.1)])
def test_sbm_rejects(sizes, p_in, p_out):
    with pytest.raises(ParameterError):
        generate_sbm(sizes, p_in, p_out)


def test_dumbbell_counts():
    g, labels = generate_dumbbell(10, 1)
    assert g.n == 20 and g.num_edges == 91
    assert labels.tolist() == [0] * 10 + [1] * 10


def test_dumbbell_two_is_path():
    g, _ = generate_dumbbell(2, 1)
    assert nx.is_isomorphic(to_nx(g), nx.path_graph(4))


def test_dumbbell_rejects_too_many_bridges():
    with pytest.raises(ParameterError):
        generate_dumbbell(3, 4)


def test_shortest_paths_examples():
    k3 = build_graph([(0, 1), (1, 2), (0, 2)], 3)
    assert shortest_path_distances(k3, 0) == {0: 0.0, 1: 1.0, 2: 1.0}
    path = build_graph([(0, 1, 1.0), (1, 2, 2.0)], 3)
    assert shortest_path_distances(path, 0) == {0: 0.0, 1: 1.0, 2: 3.0}
    assert shortest_path_distances(path, 0, radius=2.0) == {0: 0.0, 1: 1.0}
    lonely = build_graph([], 2)
    assert shortest_path_distances(lonely, 1) == {1: 0.0}


def test_shortest_paths_match_networkx_and_triangle_inequality(rng):
    for seed in range(5):
        g = erdos_renyi(30, 0.15, seed=seed, weights="random")
        ref = dict(__import__("networkx").all_pairs_dijkstra_path_length(to_nx(g)))
        d = {s: shortest_path_distances(g, s) for s in range(g.n)}
        for s in range(g.n):
            assert d[s].keys() == ref[s].keys()
            for t in d[s]:
                assert d[s][t] == pytest.approx(ref[s][t], abs=1e-12)
        for x, y, z in rng.integers(0, g.n, size=(300, 3)):
            if y in d[x] and z in d[y]:
                assert d[x][z] <= d[x][y] + d[y][z] + 1e-12


def test_attribute_weights_examples():
    same = build_graph([(0, 1)], 2, attributes=np.array([[1, 2, 3], [1, 2, 3]]))
    assert attribute_similarity_weights(same).weights.tolist() == [0.25]
    diff = build_graph([(0, 1)], 2, attributes=np.array([[1, 2, 3], [4, 5, 6]]))
    assert attribute_similarity_weights(diff).weights.tolist() == [1.0]
    one = build_graph([(0, 1)], 2, attributes=np.array([[0], [1]]))
    assert attribute_similarity_weights(one).weights.tolist() == [1.0]


def test_attribute_weights_real_tolerance():
    g = build_graph([(0, 1)], 2, attributes=np.array([[0.5], [0.5 + 1e-12]]))
    assert attribute_similarity_weights(g).weights.tolist() == [0.5]
    assert attribute_similarity_weights(g, tol=0.0).weights.tolist() == [1.0]


def test_attribute_weights_need_attributes():
    with pytest.raises(StateError):
        attribute_similarity_weights(build_graph([(0, 1)], 2))


def test_permute_relabels():
    g, _ = generate_dumbbell(3, 1)
    perm = [5, 4, 3, 2, 1, 0]
    h = g.permute(perm)
    for (u, v), w in zip(g.edges, g.weights):
        assert h.weight(perm[u], perm[v]) == w


def test_generated_graphs_valid():
    graphs = [generate_gab(4, 3)[0], generate_sbm([5, 6], 0.6, 0.1, seed=3)[0],
              generate_dumbbell(5, 2)[0], erdos_renyi(20, 0.2, seed=1, weights="random")]
    for g in graphs:
        A = g.adjacency()
        assert np.array_equal(A, A.T)
        assert (g.weights > 0).all()
        assert not np.diag(A).any()
        assert g.edges.tolist() == sorted(g.edges.tolist())
