import numpy as np
import pytest

from spex.data import Dataset, ReferenceClustering
from spex.graph import SparseGraph, cut_measures
from spex.theory import (
    DegreeWeightedClique,
    NonUniformInstance,
    clique_bound_report,
    equivalence_suite,
    is_graph,
    nonuniform_sparsity,
    pairwise_sq_distance_sum,
    price_check,
    price_suite,
    star_graph,
    conductance_bound_report,
    conductance_bound_suite,
)


def _random_graph(rng, n):
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.5:
                edges.append((i, j, float(rng.uniform(0.2, 1.5))))
    if not edges:
        edges.append((0, 1, 1.0))
    return SparseGraph.from_edges(n, edges)


def _random_cuts(rng, n, count=20):
    for _ in range(count):
        size = int(rng.integers(1, n))
        yield rng.choice(n, size=size, replace=False)


def test_unweighted_clique_reduces_to_ratio_cut():
    rng = np.random.default_rng(0)
    n = 12
    g = _random_graph(rng, n)
    inst = NonUniformInstance(g=g, h=DegreeWeightedClique(np.ones(n)))
    consts = []
    for S in _random_cuts(rng, n):
        m = cut_measures(g, S)
        if m.e == 0:
            continue
        consts.append(nonuniform_sparsity(inst, S) / m.Phi)
    # proportional to the ratio cut with one global constant
    assert np.ptp(consts) <= 1e-12 * max(consts)


def test_degree_clique_reduces_to_normalized_cut():
    rng = np.random.default_rng(1)
    n = 14
    g = _random_graph(rng, n)
    inst = NonUniformInstance(g=g, h=DegreeWeightedClique(g.degrees))
    for S in _random_cuts(rng, n):
        m = cut_measures(g, S)
        got = nonuniform_sparsity(inst, S)
        assert got == pytest.approx(m.Psi, rel=1e-12)


def test_single_edge_reduces_to_st_cut():
    rng = np.random.default_rng(2)
    n = 10
    g = _random_graph(rng, n)
    s, t = 0, n - 1
    h = SparseGraph.from_edges(n, [(s, t, 1.0)])
    inst = NonUniformInstance(g=g, h=h)
    best_sep = None
    best_sparsity = None
    for S in _random_cuts(rng, n, count=60):
        sep = (s in S) != (t in S)
        sp = nonuniform_sparsity(inst, S)
        if not sep:
            assert sp == float("inf")
            continue
        e = cut_measures(g, S).e
        if best_sep is None or e < best_sep:
            best_sep = e
        if best_sparsity is None or sp < best_sparsity:
            best_sparsity = sp
    # sparsity and separating cut weight share the same minimizers
    assert best_sparsity == pytest.approx(
        best_sep / g.total_volume * h.total_volume, rel=1e-12
    )


def test_star_and_is_graph_shapes():
    labels = np.array([0, 1, 0])
    g = star_graph(3, labels, [0, 1])
    assert g.n == 5
    assert g.edge_list() == [(0, 3, 1.0), (1, 4, 1.0), (2, 3, 1.0)]
    h = is_graph(labels)
    assert h.edge_list() == [(0, 1, 1.0), (1, 2, 1.0)]


def test_two_point_witness():
    """The sqrt(ratio) form fails for the two-way measure on two points,
    while the one-sided measure and the sqrt(2*ratio) form both hold."""
    ds = Dataset(np.array([[0.0], [1.0]]))
    g = SparseGraph.from_edges(2, [(0, 1, 1.0)])
    rep = conductance_bound_report(ds, g)
    assert rep.ratio == pytest.approx(2.0)
    assert rep.best_theta_cut[1] == pytest.approx(1.0)
    assert rep.best_Psi_cut[1] == pytest.approx(2.0)
    assert rep.holds_tight_theta
    assert not rep.holds_tight_Psi
    assert rep.holds_safe_theta


def test_pairwise_sq_distance_sum():
    pts = np.array([[0.0], [1.0], [3.0]])
    # ordered pairs: 2*(1 + 9 + 4)
    assert pairwise_sq_distance_sum(pts) == pytest.approx(28.0)


def test_clique_bound_report_simple():
    rng = np.random.default_rng(3)
    pts = np.vstack([rng.normal(0, 0.1, (10, 2)), rng.normal(5, 0.1, (10, 2))])
    labels = np.repeat([0, 1], 10)
    rep = clique_bound_report(Dataset(pts), ReferenceClustering(labels=labels, k=2))
    assert rep.holds_safe_theta
    assert rep.mean_identity_max_rel_err <= 1e-9
    # tight clusters far apart: the bound is far above the best cut
    assert rep.best_theta_cut[1] < rep.bound_tight


def test_clique_bound_rejects_all_singletons():
    ds = Dataset(np.array([[0.0], [1.0]]))
    ref = ReferenceClustering(labels=np.array([0, 1]), k=2)
    with pytest.raises(ValueError):
        clique_bound_report(ds, ref)


def test_price_check_simple():
    rng = np.random.default_rng(4)
    pts = np.vstack([rng.normal([0, 0], 0.3, (12, 2)),
                     rng.normal([4, 0], 0.3, (12, 2)),
                     rng.normal([2, 3], 0.3, (12, 2))])
    labels = np.repeat([0, 1, 2], 12)
    from spex.data import coordinatewise_median

    cents = np.stack([coordinatewise_median(pts[labels == i]) for i in range(3)])
    rep = price_check(Dataset(pts),
                      ReferenceClustering(labels=labels, k=3, centroids=cents))
    assert rep.ok
    assert rep.height <= 3


def test_price_check_requires_centroids():
    ds = Dataset(np.zeros((4, 1)) + np.arange(4)[:, None])
    ref = ReferenceClustering(labels=np.array([0, 0, 1, 1]), k=2)
    with pytest.raises(ValueError):
        price_check(ds, ref)


def test_small_suites_pass():
    assert conductance_bound_suite(seed=5, trials=10).ok
    assert equivalence_suite(seed=5, trials=10).ok
    assert price_suite(seed=5, trials=10).ok
