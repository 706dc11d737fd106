"""Coordinate-cut enumeration and best-cut search over a tree node."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

INF = float("inf")


@dataclass(frozen=True)
class CoordinateCut:
    j: int
    tau: float


@dataclass(frozen=True)
class ScoredCut:
    cut: CoordinateCut
    score: float
    prefix_size: int


class CutScorer(Protocol):
    """Incremental scorer for one coordinate sweep over a node.

    reset receives the node's point indices in coordinate-sorted order.
    advance moves a group of equal-coordinate points from suffix to prefix;
    current_score then evaluates the cut between prefix and suffix.
    """

    def reset(self, node_points_sorted: np.ndarray) -> None: ...

    def advance(self, group: np.ndarray) -> None: ...

    def current_score(self) -> float: ...


def thresholds(ds, node_points, j) -> np.ndarray:
    """Midpoint threshold per gap between consecutive distinct values."""
    vals = np.unique(ds.points[np.asarray(node_points, dtype=np.int64), j])
    return 0.5 * (vals[:-1] + vals[1:])


def sweep_groups(values, order):
    """Boundaries of equal-value runs in a sorted order (group start offsets)."""
    sorted_vals = values[order]
    change = np.flatnonzero(sorted_vals[1:] != sorted_vals[:-1]) + 1
    return np.concatenate([[0], change, [order.size]])


def best_cut(scorer: CutScorer, ds, node_points) -> ScoredCut | None:
    """Global argmin of the scorer over all coordinates and thresholds.

    Ties break toward smaller score, then smaller coordinate, then smaller
    threshold. Returns None when no coordinate admits a valid finite-score cut.
    """
    node_points = np.asarray(node_points, dtype=np.int64)
    if node_points.size < 2:
        return None
    best = None
    for j in range(ds.d):
        vals = ds.points[node_points, j]
        order = np.argsort(vals, kind="stable")
        bounds = sweep_groups(vals, order)
        if bounds.size <= 2:
            continue  # all values equal on this coordinate
        sorted_pts = node_points[order]
        sorted_vals = vals[order]
        scorer.reset(sorted_pts)
        for gi in range(bounds.size - 2):
            group = sorted_pts[bounds[gi]:bounds[gi + 1]]
            scorer.advance(group)
            score = scorer.current_score()
            if score == INF:
                continue
            tau = 0.5 * (sorted_vals[bounds[gi + 1] - 1] + sorted_vals[bounds[gi + 1]])
            key = (score, j, tau)
            if best is None or key < best[0]:
                best = (key, int(bounds[gi + 1]))
    if best is None:
        return None
    (score, j, tau), prefix_size = best
    return ScoredCut(cut=CoordinateCut(j=j, tau=float(tau)), score=float(score),
                     prefix_size=prefix_size)
