"""Graph handles, cut measures and incremental sweep accumulators.

Two graph representations are supported: an explicit sparse symmetric weighted
graph, and an implicit per-cluster clique graph stored only as labels and
cluster sizes. All cut measures are computed against the global vertex set,
even when the cut side lives inside a tree node.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

INF = float("inf")


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class CutMeasures:
    e: float          # cut weight e(S, X \ S)
    vol_s: float
    vol_rest: float
    size_s: int
    phi: float        # e / |S|
    psi: float        # e / vol(S), 0 when vol(S) = 0
    Phi: float        # ratio cut, +inf on trivial cuts
    Psi: float        # normalized cut, +inf on trivial cuts
    theta: float      # e / min(vol_s, vol_rest)


def _assemble(e, vol_s, vol_rest, size_s, size_rest):
    phi = e / size_s if size_s > 0 else 0.0
    psi = e / vol_s if vol_s > 0 else 0.0
    if size_s == 0 or size_rest == 0:
        return CutMeasures(e, vol_s, vol_rest, size_s, phi, psi, INF, INF, INF)
    n = size_s + size_rest
    Phi = e * n / (size_s * size_rest)
    psi_rest = e / vol_rest if vol_rest > 0 else 0.0
    Psi = psi + psi_rest
    mn = min(vol_s, vol_rest)
    theta = e / mn if mn > 0 else 0.0
    return CutMeasures(e, vol_s, vol_rest, size_s, phi, psi, Phi, Psi, theta)


class SparseGraph:
    """Undirected weighted graph in CSR form. Immutable after construction."""

    def __init__(self, n, indptr, indices, weights):
        self.n = int(n)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.degrees = np.zeros(self.n)
        np.add.at(self.degrees, np.repeat(np.arange(self.n), np.diff(self.indptr)),
                  self.weights)
        self.total_volume = float(self.degrees.sum())
        for arr in (self.indptr, self.indices, self.weights, self.degrees):
            arr.setflags(write=False)

    @classmethod
    def from_edges(cls, n, edges):
        """Build from undirected (u, v, w) triples, each edge listed once."""
        adj = [[] for _ in range(n)]
        for u, v, w in edges:
            u, v, w = int(u), int(v), float(w)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u},{v}) out of range")
            if u == v:
                raise GraphError("self-loops are not allowed")
            if w <= 0:
                raise GraphError("edge weights must be positive")
            adj[u].append((v, w))
            adj[v].append((u, w))
        indptr = np.zeros(n + 1, dtype=np.int64)
        for u in range(n):
            adj[u].sort()
            indptr[u + 1] = indptr[u] + len(adj[u])
        indices = np.empty(indptr[-1], dtype=np.int64)
        weights = np.empty(indptr[-1], dtype=np.float64)
        pos = 0
        for u in range(n):
            for v, w in adj[u]:
                indices[pos] = v
                weights[pos] = w
                pos += 1
        return cls(n, indptr, indices, weights)

    def neighbors(self, x):
        lo, hi = self.indptr[x], self.indptr[x + 1]
        return self.indices[lo:hi], self.weights[lo:hi]

    def edge_list(self):
        """Undirected edges, each once with u < v."""
        out = []
        for u in range(self.n):
            nbrs, ws = self.neighbors(u)
            for v, w in zip(nbrs, ws):
                if u < v:
                    out.append((u, int(v), float(w)))
        return out

    def dump(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for u, v, w in self.edge_list():
                fh.write(f"{u} {v} {w!r}\n")

    @classmethod
    def load(cls, path, n):
        edges = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    u, v, w = line.split()
                    edges.append((int(u), int(v), float(w)))
        return cls.from_edges(n, edges)


class CliqueClusterGraph:
    """Implicit per-cluster clique graph represented by labels and histograms.

    unit mode: all intra-cluster edges have weight 1, d(x) = n_i - 1.
    normalized mode: intra-cluster weight 1/(n_i - 1), d(x) = 1 (0 for
    singleton clusters, which are isolated).
    """

    def __init__(self, labels, k=None, edge_weight_mode="unit"):
        labels = np.asarray(labels, dtype=np.int64)
        if edge_weight_mode not in ("unit", "normalized"):
            raise GraphError(f"unknown edge_weight_mode {edge_weight_mode!r}")
        self.labels = labels
        self.k = int(labels.max()) + 1 if k is None else int(k)
        self.sizes = np.bincount(labels, minlength=self.k).astype(np.int64)
        self.edge_weight_mode = edge_weight_mode
        self.n = labels.size
        if edge_weight_mode == "unit":
            self.degrees = (self.sizes[labels] - 1).astype(np.float64)
        else:
            self.degrees = (self.sizes[labels] > 1).astype(np.float64)
        self.total_volume = float(self.degrees.sum())
        self.labels.setflags(write=False)
        self.degrees.setflags(write=False)

    def cluster_weight(self, i):
        """Weight of one intra-cluster edge in cluster i."""
        if self.edge_weight_mode == "unit":
            return 1.0
        return 1.0 / (self.sizes[i] - 1) if self.sizes[i] > 1 else 0.0

    def materialize(self):
        """Explicit SparseGraph equivalent; for oracles and small instances."""
        edges = []
        for i in range(self.k):
            members = np.flatnonzero(self.labels == i)
            w = self.cluster_weight(i)
            if w <= 0:
                continue
            for a in range(len(members)):
                for b in range(a + 1, len(members)):
                    edges.append((members[a], members[b], w))
        return SparseGraph.from_edges(self.n, edges)


def _clique_cut_stats(g: CliqueClusterGraph, counts):
    """(e, vol, size) of a set summarized by its per-cluster counts."""
    s = counts.astype(np.float64)
    n_i = g.sizes.astype(np.float64)
    if g.edge_weight_mode == "unit":
        e = float(np.sum(s * (n_i - s)))
        vol = float(np.sum(s * (n_i - 1)))
    else:
        big = g.sizes > 1
        e = float(np.sum(s[big] * (n_i[big] - s[big]) / (n_i[big] - 1)))
        vol = float(np.sum(s[big]))
    return e, vol, int(counts.sum())


def cut_measures(g, S) -> CutMeasures:
    """Measures of the cut (S, X \\ S) against the global vertex set."""
    S = np.asarray(S, dtype=np.int64)
    if S.size and (S.min() < 0 or S.max() >= g.n):
        raise GraphError("index out of range")
    if isinstance(g, CliqueClusterGraph):
        counts = np.bincount(g.labels[S], minlength=g.k)
        e, vol_s, size_s = _clique_cut_stats(g, counts)
        return _assemble(e, vol_s, g.total_volume - vol_s, size_s, g.n - size_s)
    mask = np.zeros(g.n, dtype=bool)
    mask[S] = True
    vol_s = float(g.degrees[S].sum())
    internal = 0.0
    for x in S:
        nbrs, ws = g.neighbors(x)
        internal += float(ws[mask[nbrs]].sum())
    e = vol_s - internal  # each internal edge is counted twice in vol_s
    e = max(e, 0.0)
    return _assemble(e, vol_s, g.total_volume - vol_s, S.size, g.n - S.size)


class CliqueSweep:
    """O(1)-per-step prefix/suffix cut accumulator for a clique graph."""

    def __init__(self, g: CliqueClusterGraph):
        self.g = g

    def reset(self, node_points):
        g = self.g
        self.node_counts = np.bincount(g.labels[node_points], minlength=g.k)
        self.prefix_counts = np.zeros(g.k, dtype=np.int64)
        e, vol, size = _clique_cut_stats(g, self.node_counts)
        self.suf_e, self.suf_vol, self.suf_size = e, vol, size
        self.pre_e, self.pre_vol, self.pre_size = 0.0, 0.0, 0

    def advance(self, point):
        g = self.g
        c = int(g.labels[point])
        s = self.prefix_counts[c]
        u = self.node_counts[c] - s  # suffix count before the move
        n_c = g.sizes[c]
        w = g.cluster_weight(c)
        d = g.degrees[point]
        # e(S) = sum_i w_i * s_i * (n_i - s_i); moving one point of cluster c
        # changes only the c term.
        self.pre_e += w * (n_c - 2 * s - 1)
        self.suf_e -= w * (n_c - 2 * u + 1)
        self.pre_vol += d
        self.suf_vol -= d
        self.prefix_counts[c] = s + 1
        self.pre_size += 1
        self.suf_size -= 1

    def measures(self):
        g = self.g
        rest = g.n - self.pre_size
        pre = _assemble(max(self.pre_e, 0.0), self.pre_vol,
                        g.total_volume - self.pre_vol, self.pre_size, rest)
        rest = g.n - self.suf_size
        suf = _assemble(max(self.suf_e, 0.0), self.suf_vol,
                        g.total_volume - self.suf_vol, self.suf_size, rest)
        return pre, suf


class SparseSweep:
    """O(deg)-per-step prefix/suffix cut accumulator for a sparse graph."""

    def __init__(self, g: SparseGraph):
        self.g = g
        self._in_prefix = np.zeros(g.n, dtype=bool)
        self._in_suffix = np.zeros(g.n, dtype=bool)

    def reset(self, node_points):
        g = self.g
        node_points = np.asarray(node_points, dtype=np.int64)
        self._in_prefix[:] = False
        self._in_suffix[:] = False
        self._in_suffix[node_points] = True
        vol = float(g.degrees[node_points].sum())
        internal = 0.0
        for x in node_points:
            nbrs, ws = g.neighbors(x)
            internal += float(ws[self._in_suffix[nbrs]].sum())
        self.suf_e = max(vol - internal, 0.0)
        self.suf_vol = vol
        self.suf_size = node_points.size
        self.pre_e, self.pre_vol, self.pre_size = 0.0, 0.0, 0

    def advance(self, point):
        g = self.g
        x = int(point)
        d = float(g.degrees[x])
        nbrs, ws = g.neighbors(x)
        w_pre = float(ws[self._in_prefix[nbrs]].sum())
        self._in_suffix[x] = False
        w_suf = float(ws[self._in_suffix[nbrs]].sum())
        self._in_prefix[x] = True
        self.pre_e += d - 2.0 * w_pre
        self.pre_vol += d
        self.pre_size += 1
        self.suf_e -= d - 2.0 * w_suf
        self.suf_vol -= d
        self.suf_size -= 1

    def measures(self):
        g = self.g
        pre = _assemble(max(self.pre_e, 0.0), self.pre_vol,
                        g.total_volume - self.pre_vol, self.pre_size,
                        g.n - self.pre_size)
        suf = _assemble(max(self.suf_e, 0.0), self.suf_vol,
                        g.total_volume - self.suf_vol, self.suf_size,
                        g.n - self.suf_size)
        return pre, suf


def make_sweep(g):
    if isinstance(g, CliqueClusterGraph):
        return CliqueSweep(g)
    if isinstance(g, SparseGraph):
        return SparseSweep(g)
    raise GraphError(f"unsupported graph handle {type(g).__name__}")


def sweep(g, node_points):
    """Yield (prefix CutMeasures, suffix CutMeasures) per prefix length 1..len-1."""
    node_points = np.asarray(node_points, dtype=np.int64)
    state = make_sweep(g)
    state.reset(node_points)
    for t in range(node_points.size - 1):
        state.advance(node_points[t])
        yield state.measures()


def build_knn_graph(ds, kappa: int, weight_mode: str = "indicator_sum") -> SparseGraph:
    """Exact brute-force kappa-nearest-neighbor graph under l2.

    Distance ties break toward the lower point index. indicator_sum weights
    are [y in N(x)] + [x in N(y)] in {1, 2}; union weights are binary.
    """
    if weight_mode not in ("indicator_sum", "union"):
        raise GraphError(f"unknown weight_mode {weight_mode!r}")
    n = ds.n
    if not 1 <= kappa < n:
        raise GraphError(f"kappa={kappa} must satisfy 1 <= kappa < n={n}")
    pts = ds.points
    sq = np.sum(pts**2, axis=1)
    counts = {}
    chunk = max(1, min(n, 2**22 // max(n, 1) + 1))
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        d2 = sq[lo:hi, None] - 2.0 * pts[lo:hi] @ pts.T + sq[None, :]
        for i in range(lo, hi):
            row = d2[i - lo].copy()
            row[i] = np.inf
            # Stable argsort breaks distance ties by lower index.
            order = np.argsort(row, kind="stable")[:kappa]
            for y in order:
                key = (i, int(y)) if i < y else (int(y), i)
                counts[key] = counts.get(key, 0) + 1
    if weight_mode == "indicator_sum":
        edges = [(u, v, float(c)) for (u, v), c in counts.items()]
    else:
        edges = [(u, v, 1.0) for (u, v) in counts]
    return SparseGraph.from_edges(n, edges)
