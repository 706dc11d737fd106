"""Acceptance gate: one check per headline claim, one pass/fail line each."""

import time

import numpy as np
import pytest

import spex
from spex.algorithms import (
    CartScorer,
    ConductanceScorer,
    MistakeScorer,
    diametrical_pair,
    gini,
)
from spex.cuts import best_cut, sweep_groups
from spex.data import Dataset, ReferenceClustering
from spex.graph import CliqueClusterGraph, build_knn_graph, cut_measures
from spex.theory import (
    clique_bound_suite,
    equivalence_suite,
    price_suite,
    conductance_bound_suite,
)
from spex.tree import assign


def report(name, ok, extra=""):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}"
    if extra:
        line += f"  ({extra})"
    print(line)
    assert ok, line


def test_criterion_1_cart_trap():
    t0 = time.perf_counter()
    ds, labels = spex.synth("cart_trap", 300, seed=1)
    ref = ReferenceClustering(*spex.relabel_contiguous(labels))
    spex_pred = assign(spex.spex_fit(ds, ("clique", ref), 3), ds)
    cart_tree = spex.cart_fit(ds, ref, 3)
    cart_pred = assign(cart_tree, ds)
    elapsed = time.perf_counter() - t0
    spex_ref_ari = spex.ari(spex_pred, ref.labels)
    cart_ref_ari = spex.ari(cart_pred, ref.labels)
    cart_root_vertical = cart_tree.nodes[cart_tree.root].j == 0
    ok = (spex_ref_ari == 1.0 and cart_ref_ari < 1.0
          and cart_root_vertical and elapsed < 1.0)
    report("criterion 1: cart_trap reproduction", ok,
           f"spex REF-ARI={spex_ref_ari:.3f}, cart REF-ARI={cart_ref_ari:.3f}, "
           f"{elapsed:.2f}s")


def test_criterion_2_two_moons():
    t0 = time.perf_counter()
    ds, labels = spex.synth("two_moons", 400, noise=0.05, seed=0)
    ref = ReferenceClustering(*spex.relabel_contiguous(labels))
    pred = assign(spex.spex_fit(ds, ("clique", ref), 2), ds)
    elapsed = time.perf_counter() - t0
    score = spex.ari(pred, labels)
    ok = score >= 0.8 and elapsed < 1.0
    report("criterion 2: two moons", ok, f"ARI={score:.3f}, {elapsed:.2f}s")


def test_criterion_3_iris_table_row():
    from sklearn.datasets import load_iris

    X, y = load_iris(return_X_y=True)
    ds = Dataset((X - X.mean(axis=0)) / X.std(axis=0))
    t0 = time.perf_counter()
    ref = spex.kmeans_fit(ds, 3, restarts=10, seed=0)
    rows = {}
    for name, tree in [
        ("spex-clique", spex.spex_fit(ds, ("clique", ref), 3)),
        ("emn", spex.emn_fit(ds, ref)),
        ("cart", spex.cart_fit(ds, ref, 3)),
    ]:
        pred = assign(tree, ds)
        rows[name] = (spex.ari(pred, y), spex.ari(pred, ref.labels))
    elapsed = time.perf_counter() - t0
    ok = elapsed < 2.0 and all(
        abs(a - 0.576) <= 0.10 and abs(r - 0.772) <= 0.10
        for a, r in rows.values()
    )
    detail = ", ".join(f"{k}: ARI={a:.3f}/REF={r:.3f}" for k, (a, r) in rows.items())
    report("criterion 3: iris table row", ok, f"{detail}, {elapsed:.2f}s")


def test_criterion_4_conductance_bound_suite():
    t0 = time.perf_counter()
    res = conductance_bound_suite(seed=0, trials=200)
    elapsed = time.perf_counter() - t0
    ok = res.passed == 200 and elapsed < 10.0
    report("criterion 4: conductance bound suite", ok,
           f"{res.passed}/200, tight-form theta rate="
           f"{res.details['tight_form_theta_rate']:.2f}, "
           f"Psi rate={res.details['tight_form_Psi_rate']:.2f}, {elapsed:.2f}s")


def test_criterion_5_weighted_clique_bound_suite():
    t0 = time.perf_counter()
    res = clique_bound_suite(seed=0, trials=100)
    elapsed = time.perf_counter() - t0
    ok = (res.passed == 100 and elapsed < 10.0
          and res.details["mean_identity_max_rel_err"] <= 1e-9)
    report("criterion 5: weighted clique bound suite", ok,
           f"{res.passed}/100, fact err="
           f"{res.details['mean_identity_max_rel_err']:.1e}, {elapsed:.2f}s")


# -- criterion 6 machinery: exhaustive from-scratch oracles per scorer --------

def _oracle_sweep(scorer, ds, node, oracle):
    """Walk every coordinate cut of a node, comparing the incremental score
    to the from-scratch oracle; return all finite (score, j, tau) triples."""
    cuts = []
    max_err = 0.0
    for j in range(ds.d):
        vals = ds.points[node, j]
        order = np.argsort(vals, kind="stable")
        bounds = sweep_groups(vals, order)
        if bounds.size <= 2:
            continue
        sorted_pts = node[order]
        sorted_vals = vals[order]
        scorer.reset(sorted_pts)
        for gi in range(bounds.size - 2):
            scorer.advance(sorted_pts[bounds[gi]:bounds[gi + 1]])
            got = scorer.current_score()
            S = sorted_pts[: bounds[gi + 1]]
            comp = sorted_pts[bounds[gi + 1]:]
            want = oracle(S, comp)
            if got == float("inf") or want == float("inf"):
                assert got == want
                continue
            err = abs(got - want) / max(1.0, abs(want))
            max_err = max(max_err, err)
            tau = 0.5 * (sorted_vals[bounds[gi + 1] - 1] + sorted_vals[bounds[gi + 1]])
            cuts.append((want, j, float(tau)))
    return cuts, max_err


def test_criterion_6_oracle_equivalence():
    rng = np.random.default_rng(0)
    worst = 0.0
    trials = 0
    for _ in range(40):  # 40 instances x 5 scorers = 200 scorer-node checks
        n = int(rng.integers(8, 31))
        d = int(rng.integers(1, 4))
        k = int(rng.integers(2, 5))
        pts = np.round(rng.uniform(0, 1, size=(n, d)), 2)  # force value ties
        ds = Dataset(pts)
        labels = np.concatenate([np.arange(k), rng.integers(0, k, n - k)])
        rng.shuffle(labels)
        ref = ReferenceClustering(labels=labels, k=k)
        node = rng.choice(n, size=int(rng.integers(2, min(12, n) + 1)),
                          replace=False)

        g_clique = CliqueClusterGraph(labels, k)
        g_knn = build_knn_graph(ds, min(3, n - 1))
        centroids = np.stack([pts[labels == i].mean(axis=0) for i in range(k)])
        aug = Dataset(np.vstack([pts, centroids]))
        cents_in = sorted(rng.choice(k, size=int(rng.integers(2, k + 1)),
                                     replace=False).tolist())
        node_aug = np.concatenate([
            node[node < n][: max(0, 12 - len(cents_in))],
            np.array([n + c for c in cents_in], dtype=np.int64),
        ])
        pair, _ = diametrical_pair(centroids, cents_in, "l2")

        def psi_oracle(g):
            def oracle(S, comp):
                return cut_measures(g, S).psi + cut_measures(g, comp).psi
            return oracle

        def cart_oracle(S, comp):
            return (S.size * gini(labels[S], k)
                    + comp.size * gini(labels[comp], k)) / n

        def mistakes(S, comp):
            side = {}
            for arr, flag in ((S, True), (comp, False)):
                for p in arr:
                    if p >= n:
                        side[int(p - n)] = flag
            mis = 0
            for arr, flag in ((S, True), (comp, False)):
                for p in arr:
                    if p < n and int(labels[p]) in side \
                            and side[int(labels[p])] != flag:
                        mis += 1
            return mis, side

        def imm_oracle(S, comp):
            mis, side = mistakes(S, comp)
            if pair[0] not in side or pair[1] not in side \
                    or side[pair[0]] == side[pair[1]]:
                return float("inf")
            return float(mis)

        def emn_oracle(S, comp):
            mis, side = mistakes(S, comp)
            a = sum(side.values())
            f = min(a, len(side) - a)
            return mis / f if f >= 1 else float("inf")

        cases = [
            (ConductanceScorer(g_clique), ds, node, psi_oracle(g_clique)),
            (ConductanceScorer(g_knn), ds, node, psi_oracle(g_knn)),
            (CartScorer(labels, k, n), ds, node, cart_oracle),
            (MistakeScorer(labels, n, k, "imm", pair=pair), aug, node_aug, imm_oracle),
            (MistakeScorer(labels, n, k, "emn"), aug, node_aug, emn_oracle),
        ]
        for scorer, data, nd, oracle in cases:
            cuts, err = _oracle_sweep(scorer, data, np.asarray(nd), oracle)
            worst = max(worst, err)
            got = best_cut(scorer, data, np.asarray(nd))
            trials += 1
            if not cuts:
                assert got is None
                continue
            assert got is not None
            # argmin must agree with the oracle; exact score ties at float
            # resolution are broken by (j, tau), so accept any cut whose
            # oracle score ties the minimum to 1e-10
            m = min(v for v, _, _ in cuts)
            tol = 1e-10 * max(1.0, abs(m))
            tied = {(j, tau) for v, j, tau in cuts if v <= m + tol}
            assert (got.cut.j, got.cut.tau) in tied
            best_key = min((v, j, tau) for v, j, tau in cuts)
            if len(tied) == 1:
                assert (got.cut.j, got.cut.tau) == best_key[1:]
            assert got.score == pytest.approx(m, rel=1e-10, abs=1e-10)
    ok = trials == 200 and worst <= 1e-10
    report("criterion 6: oracle equivalence", ok,
           f"{trials} scorer-node checks, max sweep err={worst:.1e}")


def test_criterion_7_equivalence_suite():
    t0 = time.perf_counter()
    res = equivalence_suite(seed=0, trials=100)
    elapsed = time.perf_counter() - t0
    ok = res.passed == 100 and elapsed < 5.0
    report("criterion 7: sparsest-cut equivalences", ok,
           f"{res.passed}/100, {elapsed:.2f}s")


def test_criterion_8_price_of_explainability():
    res = price_suite(seed=0, trials=100)
    ok = res.passed == 100
    report("criterion 8: price of explainability", ok,
           f"{res.passed}/100, max ratio={res.details['max_ratio']:.3f}")


def test_criterion_9_metric_units():
    ok = (spex.ari([0, 1, 2, 1], [0, 1, 2, 1]) == 1.0
          and spex.ari([0, 0, 1, 1], [0, 1, 0, 1]) == -0.5
          and spex.ami([0, 1, 0, 1], [0, 1, 0, 1]) == 1.0
          and spex.ami([0, 0, 0], [0, 0, 0]) == 1.0
          and spex.ami([0, 0, 0, 0], [0, 1, 0, 1]) == 0.0)
    report("criterion 9: metric unit values", ok)


def test_criterion_10_complexity_smoke():
    k = 3
    times = {}
    for n in (10_000, 20_000, 40_000):
        ds, labels = spex.synth("three_gaussians", n, seed=0)
        ref = ReferenceClustering(*spex.relabel_contiguous(labels))
        runs = []
        for _ in range(5):
            t0 = time.perf_counter()
            spex.spex_fit(ds, ("clique", ref), k)
            runs.append(time.perf_counter() - t0)
        times[n] = sorted(runs)[2]
    r1 = times[20_000] / times[10_000]
    r2 = times[40_000] / times[20_000]
    ok = r1 <= 2.5 and r2 <= 2.5
    report("criterion 10: complexity smoke", ok,
           f"median fit times {times[10_000]:.3f}/{times[20_000]:.3f}/"
           f"{times[40_000]:.3f}s, doubling factors {r1:.2f}, {r2:.2f}")
