"""Explainable decision trees and the greedy best-first builder."""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .cuts import CutScorer, ScoredCut, best_cut

NEG_INF = float("-inf")


class TreeError(ValueError):
    pass


@dataclass
class InternalNode:
    j: int
    tau: float
    left: int
    right: int


@dataclass
class LeafNode:
    cluster: int
    count: int


@dataclass
class ExplainTree:
    """Binary decision tree; internal nodes threshold one coordinate.

    A point routes left iff x[j] <= tau. Leaves carry cluster ids.
    """

    d: int
    nodes: list
    root: int = 0
    truncated: bool = False  # leaf target was unreachable on degenerate data

    def leaves(self):
        return [i for i, nd in enumerate(self.nodes) if isinstance(nd, LeafNode)]

    def n_leaves(self):
        return len(self.leaves())

    def height(self):
        def depth(i):
            nd = self.nodes[i]
            if isinstance(nd, LeafNode):
                return 0
            return 1 + max(depth(nd.left), depth(nd.right))

        return depth(self.root)


def assign(tree: ExplainTree, ds) -> np.ndarray:
    """Route every point root-to-leaf and return its leaf cluster id."""
    pts = ds.points
    out = np.empty(ds.n, dtype=np.int64)
    stack = [(tree.root, np.arange(ds.n))]
    while stack:
        node_id, idx = stack.pop()
        nd = tree.nodes[node_id]
        if isinstance(nd, LeafNode):
            out[idx] = nd.cluster
            continue
        if nd.j >= ds.d:
            raise TreeError(f"tree coordinate {nd.j} out of range for d={ds.d}")
        left = pts[idx, nd.j] <= nd.tau
        stack.append((nd.left, idx[left]))
        stack.append((nd.right, idx[~left]))
    return out


class SplitStrategy(Protocol):
    """Supplies per-node cut scoring and a leaf quality value."""

    def make_scorer(self) -> CutScorer: ...

    def leaf_quality(self, node_points: np.ndarray) -> float: ...


@dataclass
class SplitRecord:
    node_id: int
    depth: int
    cut: ScoredCut
    priority: float
    size: int


@dataclass
class BuildInfo:
    splits: list = field(default_factory=list)
    leaf_points: dict = field(default_factory=dict)  # node id -> point indices


def build_tree(ds, strategy: SplitStrategy, leaf_target: int,
               info: BuildInfo | None = None) -> ExplainTree:
    """Greedy best-first tree construction.

    Maintains a max-priority queue over leaves keyed by
    leaf_quality(X_v) - best CutScore(X_v); ties break toward the larger
    member count, then the smaller node id. Stops at leaf_target leaves or
    when only -inf priorities remain (tree flagged truncated).
    """
    if leaf_target < 1:
        raise TreeError("leaf target must be >= 1")
    all_points = np.arange(ds.n)
    nodes: list = [LeafNode(cluster=0, count=ds.n)]
    members = {0: all_points}
    depths = {0: 0}
    quality = {0: strategy.leaf_quality(all_points)}

    def enqueue(heap, node_id):
        sc = best_cut(strategy.make_scorer(), ds, members[node_id])
        prio = NEG_INF if sc is None else quality[node_id] - sc.score
        heapq.heappush(heap, (-prio, -members[node_id].size, node_id, sc))

    heap: list = []
    enqueue(heap, 0)
    n_leaves = 1
    total_quality = quality[0]
    while n_leaves < leaf_target:
        neg_prio, _, node_id, sc = heapq.heappop(heap)
        prio = -neg_prio
        if prio == NEG_INF:
            tree = _finalize(ds, nodes, members, info)
            tree.truncated = True
            return tree
        pts = members[node_id]
        j, tau = sc.cut.j, sc.cut.tau
        left_mask = ds.points[pts, j] <= tau
        left_pts, right_pts = pts[left_mask], pts[~left_mask]
        left_id, right_id = len(nodes), len(nodes) + 1
        nodes.append(LeafNode(cluster=0, count=left_pts.size))
        nodes.append(LeafNode(cluster=0, count=right_pts.size))
        nodes[node_id] = InternalNode(j=j, tau=tau, left=left_id, right=right_id)
        members[left_id], members[right_id] = left_pts, right_pts
        depths[left_id] = depths[right_id] = depths[node_id] + 1
        quality[left_id] = strategy.leaf_quality(left_pts)
        quality[right_id] = strategy.leaf_quality(right_pts)
        # The split trades the popped leaf's quality for the two children's;
        # the bookkeeping must agree with the popped priority.
        new_total = total_quality - quality[node_id] + quality[left_id] + quality[right_id]
        expected = total_quality - prio
        if not math.isclose(new_total, expected, rel_tol=1e-9, abs_tol=1e-9):
            raise TreeError(
                f"objective bookkeeping drift: {new_total} vs {expected}"
            )
        total_quality = new_total
        if info is not None:
            info.splits.append(SplitRecord(node_id=node_id, depth=depths[node_id],
                                           cut=sc, priority=prio, size=pts.size))
        del members[node_id], quality[node_id]
        enqueue(heap, left_id)
        enqueue(heap, right_id)
        n_leaves += 1
    return _finalize(ds, nodes, members, info)


def _finalize(ds, nodes, members, info):
    tree = ExplainTree(d=ds.d, nodes=nodes)
    relabel_leaves_in_order(tree)
    if info is not None:
        for i, nd in enumerate(tree.nodes):
            if isinstance(nd, LeafNode):
                info.leaf_points[i] = members[i]
    return tree


def relabel_leaves_in_order(tree: ExplainTree):
    """Assign leaf cluster ids 0..#leaves-1 in left-to-right order."""
    next_id = 0

    def walk(i):
        nonlocal next_id
        nd = tree.nodes[i]
        if isinstance(nd, LeafNode):
            nd.cluster = next_id
            next_id += 1
        else:
            walk(nd.left)
            walk(nd.right)

    walk(tree.root)


def to_json(tree: ExplainTree) -> str:
    doc = {"d": tree.d, "root": tree.root, "nodes": []}
    for i, nd in enumerate(tree.nodes):
        if isinstance(nd, LeafNode):
            doc["nodes"].append(
                {"id": i, "kind": "leaf", "cluster": nd.cluster, "count": nd.count}
            )
        else:
            doc["nodes"].append(
                {"id": i, "kind": "internal", "j": nd.j, "tau": nd.tau,
                 "left": nd.left, "right": nd.right}
            )
    # json reproduces Python float repr, which round-trips exactly within
    # 17 significant digits.
    return json.dumps(doc, indent=2)


def from_json(text: str) -> ExplainTree:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TreeError(f"malformed tree document: {exc}") from None
    try:
        d, root, node_docs = int(doc["d"]), int(doc["root"]), doc["nodes"]
    except (KeyError, TypeError) as exc:
        raise TreeError(f"malformed tree document: {exc}") from None
    by_id = {}
    for nd in node_docs:
        i = int(nd["id"])
        if i in by_id:
            raise TreeError(f"duplicate node id {i}")
        if nd["kind"] == "leaf":
            by_id[i] = LeafNode(cluster=int(nd["cluster"]), count=int(nd["count"]))
        elif nd["kind"] == "internal":
            by_id[i] = InternalNode(j=int(nd["j"]), tau=float(nd["tau"]),
                                    left=int(nd["left"]), right=int(nd["right"]))
        else:
            raise TreeError(f"unknown node kind {nd['kind']!r}")
    if root not in by_id:
        raise TreeError("dangling root id")
    n = max(by_id) + 1
    nodes = []
    for i in range(n):
        if i not in by_id:
            raise TreeError(f"missing node id {i}")
        nodes.append(by_id[i])
    # Reachability walk doubles as cycle / dangling-child detection.
    seen = set()
    stack = [root]
    while stack:
        i = stack.pop()
        if i in seen:
            raise TreeError("cycle detected in tree document")
        seen.add(i)
        nd = nodes[i]
        if isinstance(nd, InternalNode):
            for child in (nd.left, nd.right):
                if child not in by_id:
                    raise TreeError(f"dangling child id {child}")
                stack.append(child)
    return ExplainTree(d=d, nodes=nodes, root=root)
