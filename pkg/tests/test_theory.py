from fractions import Fraction

import numpy as np
import pytest

from orcpool.errors import ParameterError
from orcpool.graph import generate_gab
from orcpool.metrics import modularity
from orcpool.theory import (analytic_modularity, analytic_weight_evolution, empirical_type_weights,
                            flow_matrix, gab_modularity_series, is_nondecreasing,
                            verify_eigenstructure, verify_gab)


def exact_F(a, b):
    s = Fraction(a + b)
    return [[Fraction(a - 1) / s, Fraction(2 * a) / s, Fraction(0)],
            [Fraction(b) / s, Fraction(a * b - a - b) / (a * s), 1 / s],
            [Fraction(0), Fraction(0), Fraction(1, a)]]


def test_flow_matrix_three_three():
    expect = [[1 / 3, 1, 0], [1 / 2, 1 / 6, 1 / 6], [0, 0, 1 / 3]]
    assert np.allclose(flow_matrix(3, 3), expect, atol=1e-15, rtol=0)


def test_flow_matrix_four_three():
    expect = [[3 / 7, 8 / 7, 0], [3 / 7, 5 / 28, 1 / 7], [0, 0, 1 / 4]]
    assert np.allclose(flow_matrix(4, 3), expect, atol=1e-15, rtol=0)


def test_flow_matrix_is_correctly_rounded():
    for a in range(2, 11):
        for b in range(2, a + 1):
            F = flow_matrix(a, b)
            assert F[2, 2] == 1 / a
            for i, row in enumerate(exact_F(a, b)):
                for j, x in enumerate(row):
                    assert abs(F[i, j] - float(x)) <= 1e-15


def test_flow_matrix_precondition():
    with pytest.raises(ParameterError):
        flow_matrix(2, 3)


def test_weight_evolution():
    w = analytic_weight_evolution(3, 3, 30)
    assert w[0].tolist() == [1, 1, 1]
    assert np.allclose(w[1], [4 / 3, 5 / 6, 1 / 3], atol=1e-15)
    assert np.allclose(w[:, 2], 3.0 ** -np.arange(31), rtol=1e-12, atol=0)
    # the first two components follow F exactly, checked in rationals
    F = exact_F(3, 3)
    v = [Fraction(1)] * 3
    for t in range(1, 8):
        v = [sum(F[i][j] * v[j] for j in range(3)) for i in range(3)]
        assert np.allclose(w[t], [float(x) for x in v], rtol=1e-13, atol=0)


def test_eigen_report_reports_values():
    rep = verify_eigenstructure(5, 2)
    assert rep.real and rep.lambda2_is_inv_a and rep.lambda3_negative
    assert rep.lambda1_gt_1
    # for a=b=3 the leading eigenvalue is below one (trace 1/2, det -4/9 on the 2x2 block)
    low = verify_eigenstructure(3, 3)
    assert low.eigenvalues[0] == pytest.approx(0.25 + np.sqrt(1 / 16 + 4 / 9), abs=1e-12)
    assert not low.passed


def test_analytic_modularity_matches_graph_at_t0():
    for a, b in [(3, 3), (4, 2), (6, 4)]:
        g, labels, _ = generate_gab(a, b)
        q0 = gab_modularity_series(a, b, 0, "analytic")[0]
        assert q0 == pytest.approx(modularity(g, labels, "unordered"), abs=1e-14)


def test_analytic_modularity_matches_weighted_graph(rng):
    g, labels, types = generate_gab(4, 3)
    w = rng.uniform(0.5, 2.0, 3)
    weighted = g.with_weights(w[types - 1])
    assert analytic_modularity(4, 3, w) == pytest.approx(
        modularity(weighted, labels, "unordered"), abs=1e-14)


def test_empirical_series_uses_flow():
    q = gab_modularity_series(3, 3, 3, "empirical")
    assert q.shape == (4,)
    g, labels, _ = generate_gab(3, 3)
    assert q[0] == pytest.approx(modularity(g, labels, "unordered"), abs=1e-15)


def test_empirical_type_weights_uniform():
    means, spread = empirical_type_weights(4, 3, T=5, normalization="sum")
    assert spread.max() <= 1e-9
    assert means.shape == (6, 3)


def test_nondecreasing_helper():
    assert is_nondecreasing(np.array([0.1, 0.1, 0.2]))
    assert not is_nondecreasing(np.array([0.2, 0.1]))


def test_verify_report_shape():
    rep = verify_gab(3, 3, T=3)
    assert set(rep["claims"]) == {"one_step_matches_F", "type_uniformity", "eigenstructure",
                                  "analytic_modularity_nondecreasing",
                                  "empirical_modularity_nondecreasing"}
    assert rep["claims"]["type_uniformity"]["passed"]
    assert isinstance(rep["passed"], bool)
