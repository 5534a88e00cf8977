import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import normalized_mutual_info_score

from orcpool.errors import ParameterError, ValidationError
from orcpool.graph import build_graph, erdos_renyi
from orcpool.metrics import MetricReport, modularity, modularity_report, nmi, nmi_report

from conftest import to_nx

TWO_K3 = build_graph([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)], 6)

partitions = st.lists(st.integers(0, 4), min_size=2, max_size=40)


def test_two_triangles_ordered():
    assert modularity(TWO_K3, [0, 0, 0, 1, 1, 1]) == pytest.approx(0.5, abs=1e-15)


def test_k2_single_cluster():
    assert modularity(build_graph([(0, 1)], 2), [0, 0]) == pytest.approx(0.0, abs=1e-15)


def test_singletons_negative():
    g = erdos_renyi(12, 0.4, seed=1, weights="random")
    d = g.weighted_degrees()
    expect = -(d ** 2).sum() / d.sum() ** 2
    assert modularity(g, np.arange(g.n)) == pytest.approx(expect, abs=1e-15)


def test_unordered_by_hand():
    # pairs u < v inside each triangle: 3 * (1 - 2 * 2 / 6) per triangle, over m = 6
    assert modularity(TWO_K3, [0, 0, 0, 1, 1, 1], "unordered") == pytest.approx(1 / 3)


def test_unordered_brute_force(rng):
    g = erdos_renyi(10, 0.5, seed=3, weights="random")
    A = g.adjacency()
    d = A.sum(1)
    m = A.sum() / 2
    lab = rng.integers(0, 3, g.n)
    q = sum(A[u, v] - d[u] * d[v] / m for u in range(g.n) for v in range(u + 1, g.n)
            if lab[u] == lab[v]) / m
    assert modularity(g, lab, "unordered") == pytest.approx(q, abs=1e-12)


def test_ordered_matches_networkx(rng):
    for seed in range(20):
        g = erdos_renyi(20, 0.3, seed=seed, weights="random")
        lab = rng.integers(0, 4, g.n)
        comms = [set(np.flatnonzero(lab == k).tolist()) for k in range(4)]
        ref = nx.community.modularity(to_nx(g), [c for c in comms if c])
        assert modularity(g, lab) == pytest.approx(ref, abs=1e-12)


def test_modularity_scale_free(rng):
    g = erdos_renyi(20, 0.3, seed=4)
    lab = rng.integers(0, 3, g.n)
    for conv in ("ordered", "unordered"):
        base = modularity(g, lab, conv)
        assert modularity(g.with_weights(g.weights * 4.0), lab, conv) == base


def test_modularity_errors():
    with pytest.raises(ParameterError):
        modularity(TWO_K3, [0, 1])
    with pytest.raises(ParameterError):
        modularity(TWO_K3, [0] * 6, convention="directed")
    with pytest.raises(ValidationError):
        modularity(build_graph([], 2), [0, 1])


def test_nmi_examples():
    assert nmi([0, 0, 1, 1], [0, 0, 1, 1]) == 1.0
    assert nmi([0, 0, 1, 1], [0, 0, 1, 1], "paper") == 1.0
    assert nmi([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0
    assert nmi([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(0.0, abs=1e-15)


def test_nmi_paper_variant_by_hand():
    # H(A|B) = 1 bit and H(B|A) = 1 bit for independent fair bipartitions
    assert nmi([0, 0, 1, 1], [0, 1, 0, 1], "paper") == pytest.approx(0.0, abs=1e-15)
    # B refines A: H(A|B) = 0, H(B|A) = 1 bit
    assert nmi([0, 0, 1, 1], [0, 1, 2, 3], "paper") == pytest.approx(0.5, abs=1e-15)


def test_nmi_matches_sklearn(rng):
    for _ in range(100):
        a = rng.integers(0, 5, 30)
        b = rng.integers(0, 3, 30)
        assert nmi(a, b) == pytest.approx(normalized_mutual_info_score(a, b), abs=1e-12)


def test_nmi_length_mismatch():
    with pytest.raises(ParameterError):
        nmi([0, 1], [0, 1, 1])


@settings(max_examples=100, deadline=None)
@given(partitions, st.randoms())
def test_nmi_symmetric(p, r):
    q = list(p)
    r.shuffle(q)
    for variant in ("standard", "paper"):
        assert nmi(p, q, variant) == pytest.approx(nmi(q, p, variant), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(partitions, partitions)
def test_nmi_label_permutation_and_range(p, q):
    n = min(len(p), len(q))
    p, q = np.array(p[:n]), np.array(q[:n])
    relabel = (p * 7 + 3) % 11
    assert nmi(relabel, q) == pytest.approx(nmi(p, q), abs=1e-12)
    assert 0.0 <= nmi(p, q) <= 1.0
    assert nmi(p, q, "paper") <= 1.0


def test_reports():
    rep = modularity_report(TWO_K3, [0, 0, 0, 1, 1, 1])
    assert isinstance(rep, MetricReport)
    assert rep.to_dict()["metric"] == "modularity" and rep.convention == "ordered"
    assert nmi_report([0, 1], [1, 0], "paper").convention == "paper"
