"""Cut-scoring strategies: conductance trees, CART, and the centroid-based
mistake minimizers (modified IMM and EMN)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cuts import INF, best_cut
from .data import DataError, Dataset, ReferenceClustering
from .graph import CliqueClusterGraph, SparseGraph, build_knn_graph, make_sweep
from .tree import (
    BuildInfo,
    ExplainTree,
    InternalNode,
    LeafNode,
    build_tree,
)


# ---------------------------------------------------------------------------
# Conductance strategy (SpEx)

class ConductanceScorer:
    """CutScore = psi(prefix) + psi(suffix), both against the global graph."""

    def __init__(self, g):
        self._sweep = make_sweep(g)

    def reset(self, node_points_sorted):
        self._sweep.reset(node_points_sorted)

    def advance(self, group):
        for p in group:
            self._sweep.advance(p)

    def current_score(self):
        pre, suf = self._sweep.measures()
        return pre.psi + suf.psi


class ConductanceStrategy:
    def __init__(self, g):
        self.g = g
        self._sweep = make_sweep(g)

    def make_scorer(self):
        return ConductanceScorer(self.g)

    def leaf_quality(self, node_points):
        if node_points.size == 0:
            return 0.0
        # Full-node stats come from a zero-length sweep reset.
        self._sweep.reset(node_points)
        vol = self._sweep.suf_vol
        e = self._sweep.suf_e
        return e / vol if vol > 0 else 0.0


def spex_clique_strategy(ref: ReferenceClustering, edge_weight_mode="unit"):
    return ConductanceStrategy(CliqueClusterGraph(ref.labels, ref.k, edge_weight_mode))


def spex_fit(ds: Dataset, source, leaf_target: int,
             info: BuildInfo | None = None) -> ExplainTree:
    """Fit a conductance-minimizing tree.

    source is either ("clique", ReferenceClustering) or ("knn", kappa) /
    ("knn", kappa, weight_mode), or a prebuilt graph handle.
    """
    if isinstance(source, (CliqueClusterGraph, SparseGraph)):
        g = source
    else:
        kind = source[0]
        if kind == "clique":
            ref = source[1]
            if ref.n != ds.n:
                raise DataError("reference labeling length does not match dataset")
            g = CliqueClusterGraph(ref.labels, ref.k)
        elif kind == "knn":
            kappa = source[1]
            weight_mode = source[2] if len(source) > 2 else "indicator_sum"
            g = build_knn_graph(ds, kappa, weight_mode)
        else:
            raise DataError(f"unknown graph source {kind!r}")
    return build_tree(ds, ConductanceStrategy(g), leaf_target, info=info)


# ---------------------------------------------------------------------------
# CART

@dataclass(frozen=True)
class ImpurityMeasures:
    gini: float
    cut_impurity: float
    modified_cut_impurity: float


def gini(labels_subset, k) -> float:
    """Gini impurity of the cluster distribution of a set; 0 on empty sets."""
    m = labels_subset.size
    if m == 0:
        return 0.0
    counts = np.bincount(labels_subset, minlength=k)
    return float(1.0 - np.sum((counts / m) ** 2))


def is_graph_stats(ref: ReferenceClustering, idx):
    """(alpha_H, vol_H) of a set in the independent-set graph over ref.

    alpha_H counts internal edges once (unordered pairs); vol_H is the sum
    of IS-graph degrees n - n_{label(x)}.
    """
    counts = np.bincount(ref.labels[idx], minlength=ref.k).astype(np.float64)
    m = counts.sum()
    alpha = 0.5 * (m * m - np.sum(counts * counts))
    sizes = ref.cluster_sizes().astype(np.float64)
    vol = float(np.sum(counts * (ref.n - sizes)))
    return float(alpha), vol


def impurity(ref: ReferenceClustering, S, complement) -> ImpurityMeasures:
    """Gini, size-weighted cut impurity, and its IS-graph volume-weighted form."""
    S = np.asarray(S, dtype=np.int64)
    complement = np.asarray(complement, dtype=np.int64)
    if np.intersect1d(S, complement).size:
        raise DataError("S and complement must be disjoint")
    g = gini(ref.labels[S], ref.k)
    g_c = gini(ref.labels[complement], ref.k)
    total = S.size + complement.size
    ups = (S.size * g + complement.size * g_c) / total if total else 0.0

    a_s, v_s = is_graph_stats(ref, S)
    a_c, v_c = is_graph_stats(ref, complement)
    sizes = ref.cluster_sizes().astype(np.float64)
    vol_x = float(np.sum(sizes * (ref.n - sizes)))
    term = (a_s / v_s if v_s > 0 else 0.0) + (a_c / v_c if v_c > 0 else 0.0)
    # Scaled so that Psi_H(S) = 2 - (vol_H(X)/2) * modified impurity holds
    # exactly with alpha counted over unordered pairs.
    ups_mod = 4.0 * term / vol_x if vol_x > 0 else 0.0
    return ImpurityMeasures(gini=g, cut_impurity=float(ups),
                            modified_cut_impurity=float(ups_mod))


class CartScorer:
    """CutScore = (|S| gini(S) + |S'| gini(S')) / n, n the full dataset size."""

    def __init__(self, labels, k, n_total):
        self.labels = labels
        self.k = k
        self.n_total = n_total

    def reset(self, node_points_sorted):
        self.suf_counts = np.bincount(self.labels[node_points_sorted],
                                      minlength=self.k).astype(np.int64)
        self.pre_counts = np.zeros(self.k, dtype=np.int64)
        self.pre_sq = 0
        self.suf_sq = int(np.sum(self.suf_counts**2))
        self.pre_size = 0
        self.suf_size = int(node_points_sorted.size)

    def advance(self, group):
        for p in group:
            c = self.labels[p]
            self.pre_sq += 2 * self.pre_counts[c] + 1
            self.suf_sq -= 2 * self.suf_counts[c] - 1
            self.pre_counts[c] += 1
            self.suf_counts[c] -= 1
            self.pre_size += 1
            self.suf_size -= 1

    def current_score(self):
        # |S| * gini(S) = |S| - sum(counts^2)/|S|
        s = self.pre_size - self.pre_sq / self.pre_size if self.pre_size else 0.0
        u = self.suf_size - self.suf_sq / self.suf_size if self.suf_size else 0.0
        return (s + u) / self.n_total


class CartStrategy:
    def __init__(self, ref: ReferenceClustering, n_total):
        self.ref = ref
        self.n_total = n_total

    def make_scorer(self):
        return CartScorer(self.ref.labels, self.ref.k, self.n_total)

    def leaf_quality(self, node_points):
        return node_points.size / self.n_total * gini(self.ref.labels[node_points],
                                                      self.ref.k)


def cart_fit(ds: Dataset, ref: ReferenceClustering, leaf_target: int,
             info: BuildInfo | None = None) -> ExplainTree:
    """Greedy impurity-reduction tree over the reference labels."""
    if ref.n != ds.n:
        raise DataError("reference labeling length does not match dataset")
    return build_tree(ds, CartStrategy(ref, ds.n), leaf_target, info=info)


# ---------------------------------------------------------------------------
# IMM / EMN (centroid-based mistake minimizers)

class MistakeScorer:
    """Mistake count over a node holding points and centroid pseudo-points.

    Indices < n_points are data points labeled by cluster; indices >= n_points
    are centroids (index n_points + i is the centroid of cluster i). A point
    counts as a mistake only while its own centroid is in the node.
    score semantics:
      mode "imm": mistakes, restricted to cuts separating the fixed pair.
      mode "emn": mistakes / min(#centroids per side), needing one per side.
    """

    def __init__(self, labels, n_points, k, mode, pair=None):
        self.labels = labels
        self.n_points = n_points
        self.k = k
        self.mode = mode
        self.pair = pair  # (cluster id, cluster id) of the diametrical centroids

    def reset(self, node_points_sorted):
        pts = node_points_sorted
        self.cent_in_node = np.zeros(self.k, dtype=bool)
        self.cent_in_prefix = np.zeros(self.k, dtype=bool)
        self.pts_in_node = np.zeros(self.k, dtype=np.int64)
        self.pts_in_prefix = np.zeros(self.k, dtype=np.int64)
        for p in pts:
            if p >= self.n_points:
                self.cent_in_node[p - self.n_points] = True
            else:
                self.pts_in_node[self.labels[p]] += 1
        self.n_cent_node = int(self.cent_in_node.sum())
        self.n_cent_prefix = 0
        self.mis = 0

    def advance(self, group):
        for p in group:
            if p >= self.n_points:
                c = p - self.n_points
                # The centroid switches sides: its cluster's mistakes flip
                # from the prefix members to the suffix members.
                self.mis += int(self.pts_in_node[c] - 2 * self.pts_in_prefix[c])
                self.cent_in_prefix[c] = True
                self.n_cent_prefix += 1
            else:
                c = self.labels[p]
                if self.cent_in_node[c]:
                    self.mis += -1 if self.cent_in_prefix[c] else 1
                self.pts_in_prefix[c] += 1

    def current_score(self):
        if self.mode == "imm":
            a, b = self.pair
            if self.cent_in_prefix[a] == self.cent_in_prefix[b]:
                return INF
            return float(self.mis)
        f = min(self.n_cent_prefix, self.n_cent_node - self.n_cent_prefix)
        if f < 1:
            return INF
        return self.mis / f


def diametrical_pair(centroids, cluster_ids, norm):
    """Cluster-id pair of centroids at maximal distance; lexicographic ties."""
    ord_p = 1 if norm == "l1" else 2
    best = None
    ids = sorted(cluster_ids)
    for ai in range(len(ids)):
        for bi in range(ai + 1, len(ids)):
            a, b = ids[ai], ids[bi]
            dist = float(np.linalg.norm(centroids[a] - centroids[b], ord=ord_p))
            if best is None or dist > best[0]:
                best = (dist, (a, b))
    return best[1], best[0]


@dataclass
class CentroidSplitRecord:
    depth: int
    mistakes: int
    pair: tuple
    pair_distance: float


@dataclass
class CentroidFitResult:
    tree: ExplainTree
    splits: list = field(default_factory=list)


def _centroid_fit(ds, ref, mode, norm) -> CentroidFitResult:
    if ref.centroids is None:
        raise DataError(f"{mode.upper()} requires a centroid-bearing reference")
    if ref.n != ds.n:
        raise DataError("reference labeling length does not match dataset")
    n, k = ds.n, ref.k
    aug = Dataset(np.vstack([ds.points, ref.centroids]))
    labels = ref.labels

    nodes = [None]
    splits = []
    # (node id, member aug-indices, depth); processed in node-id order.
    work = [(0, np.arange(n + k), 0)]
    while work:
        node_id, members, depth = work.pop(0)
        cents = sorted(int(p - n) for p in members if p >= n)
        if len(cents) <= 1:
            cluster = cents[0] if cents else 0
            count = int(np.sum(members < n))
            nodes[node_id] = LeafNode(cluster=cluster, count=count)
            continue
        pair, pair_dist = diametrical_pair(ref.centroids, cents, norm)
        scorer = MistakeScorer(labels, n, k, mode, pair=pair)
        sc = best_cut(scorer, aug, members)
        if sc is None:
            # Degenerate node: coincident centroids cannot be separated.
            count = int(np.sum(members < n))
            nodes[node_id] = LeafNode(cluster=cents[0], count=count)
            continue
        j, tau = sc.cut.j, sc.cut.tau
        left_mask = aug.points[members, j] <= tau
        left_id, right_id = len(nodes), len(nodes) + 1
        nodes.extend([None, None])
        nodes[node_id] = InternalNode(j=j, tau=tau, left=left_id, right=right_id)
        mistakes = _count_mistakes(labels, n, members, left_mask)
        splits.append(CentroidSplitRecord(depth=depth, mistakes=mistakes,
                                          pair=pair, pair_distance=pair_dist))
        work.append((left_id, members[left_mask], depth + 1))
        work.append((right_id, members[~left_mask], depth + 1))
    tree = ExplainTree(d=ds.d, nodes=nodes)
    return CentroidFitResult(tree=tree, splits=splits)


def _count_mistakes(labels, n_points, members, left_mask):
    cent_side = {}
    for p, on_left in zip(members, left_mask):
        if p >= n_points:
            cent_side[int(p - n_points)] = bool(on_left)
    mis = 0
    for p, on_left in zip(members, left_mask):
        if p < n_points:
            c = int(labels[p])
            if c in cent_side and cent_side[c] != bool(on_left):
                mis += 1
    return mis


def imm_fit(ds: Dataset, ref: ReferenceClustering, norm: str = "l2") -> ExplainTree:
    """Modified iterative mistake minimization: in each node, minimize
    mistakes among cuts separating the diametrical centroid pair."""
    return _centroid_fit(ds, ref, "imm", norm).tree


def emn_fit(ds: Dataset, ref: ReferenceClustering, norm: str = "l2") -> ExplainTree:
    """EMN: minimize mistakes / min(#centroids per side) in each node."""
    return _centroid_fit(ds, ref, "emn", norm).tree


def imm_fit_with_info(ds, ref, norm="l2") -> CentroidFitResult:
    return _centroid_fit(ds, ref, "imm", norm)
