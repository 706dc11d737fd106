"""Datasets, reference clusterings, synthetic generators and clustering costs."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np


class DataError(ValueError):
    """Raised on malformed input files or invalid dataset/clustering arguments."""


@dataclass(frozen=True)
class Dataset:
    """An immutable n x d matrix of finite real coordinates."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise DataError("points must be a non-empty 2-d array")
        if not np.all(np.isfinite(pts)):
            raise DataError("points must be finite (no NaN/Inf)")
        pts = np.ascontiguousarray(pts)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class ReferenceClustering:
    """A length-n labeling with k contiguous classes, optionally with centroids."""

    labels: np.ndarray
    k: int
    centroids: np.ndarray | None = None

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1 or labels.size < 1:
            raise DataError("labels must be a non-empty 1-d sequence")
        if self.k < 1:
            raise DataError("k must be >= 1")
        present = np.unique(labels)
        if present[0] < 0 or present[-1] >= self.k or present.size != self.k:
            raise DataError("every label in [0, k) must occur at least once")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        if self.centroids is not None:
            cen = np.asarray(self.centroids, dtype=np.float64)
            if cen.ndim != 2 or cen.shape[0] != self.k:
                raise DataError("centroids must have exactly k rows")
            if not np.all(np.isfinite(cen)):
                raise DataError("centroids must be finite")
            cen = np.ascontiguousarray(cen)
            cen.setflags(write=False)
            object.__setattr__(self, "centroids", cen)

    @property
    def n(self) -> int:
        return self.labels.size

    def cluster_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


@dataclass(frozen=True)
class CostReport:
    kmeans_cost: float
    kmedians_l1_cost: float


def relabel_contiguous(raw_labels) -> tuple[np.ndarray, int]:
    """Map arbitrary integer labels onto 0..k-1, preserving class identity.

    Classes are numbered by ascending original label value.
    """
    raw = np.asarray(raw_labels, dtype=np.int64)
    uniq, dense = np.unique(raw, return_inverse=True)
    return dense.astype(np.int64), int(uniq.size)


def _parse_csv_rows(path, header: bool):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if header and rows:
        rows = rows[1:]
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise DataError(f"{path}: empty file")
    return rows


def ingest(points_path, labels_path=None, header: bool = False):
    """Read a CSV point file and an optional label file (one integer per row).

    Returns (Dataset, ReferenceClustering | None). Labels are relabeled to a
    contiguous 0..k-1 range; no centroids are attached.
    """
    rows = _parse_csv_rows(points_path, header)
    width = len(rows[0])
    data = np.empty((len(rows), width), dtype=np.float64)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataError(
                f"{points_path}: row {i + 1} has {len(row)} fields, expected {width}"
            )
        for j, cell in enumerate(row):
            try:
                data[i, j] = float(cell)
            except ValueError:
                raise DataError(
                    f"{points_path}: non-numeric cell {cell!r} at row {i + 1}"
                ) from None
    ds = Dataset(data)

    if labels_path is None:
        return ds, None
    label_rows = _parse_csv_rows(labels_path, header)
    raw = []
    for i, row in enumerate(label_rows):
        cell = row[0].strip()
        try:
            raw.append(int(cell))
        except ValueError:
            raise DataError(
                f"{labels_path}: non-integer label {cell!r} at row {i + 1}"
            ) from None
    if len(raw) != ds.n:
        raise DataError(
            f"label count mismatch: {len(raw)} labels for {ds.n} points"
        )
    labels, k = relabel_contiguous(raw)
    return ds, ReferenceClustering(labels=labels, k=k)


def read_labels(path, n: int | None = None, header: bool = False) -> np.ndarray:
    """Read an integer-per-line label file without relabeling."""
    rows = _parse_csv_rows(path, header)
    try:
        raw = np.array([int(r[0]) for r in rows], dtype=np.int64)
    except ValueError:
        raise DataError(f"{path}: non-integer label") from None
    if n is not None and raw.size != n:
        raise DataError(f"label count mismatch: {raw.size} labels for {n} points")
    return raw


def _kmeans_pp_seed(points, k, rng):
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    first = rng.integers(n)
    centers[0] = points[first]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = rng.integers(n)
        else:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total))
            idx = min(idx, n - 1)
        centers[i] = points[idx]
        d2 = np.minimum(d2, np.sum((points - centers[i]) ** 2, axis=1))
    return centers


def _lloyd(points, centers, max_iter):
    n, k = points.shape[0], centers.shape[0]
    prev_cost = np.inf
    labels = None
    for _ in range(max_iter):
        d2 = (
            np.sum(points**2, axis=1)[:, None]
            - 2.0 * points @ centers.T
            + np.sum(centers**2, axis=1)[None, :]
        )
        new_labels = np.argmin(d2, axis=1)
        cost = float(np.sum(np.take_along_axis(d2, new_labels[:, None], axis=1)))
        cost = max(cost, 0.0)
        # Lloyd steps never increase the objective.
        assert cost <= prev_cost + 1e-8 * (1.0 + abs(prev_cost)), "k-means cost increased"
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        prev_cost = cost
        for i in range(k):
            mask = labels == i
            if mask.any():
                centers[i] = points[mask].mean(axis=0)
            else:
                # Reseed an empty cluster from the point farthest from its center.
                far = int(np.argmax(np.min(d2, axis=1)))
                centers[i] = points[far]
    # Exact final assignment/cost against the final centers.
    d2 = (
        np.sum(points**2, axis=1)[:, None]
        - 2.0 * points @ centers.T
        + np.sum(centers**2, axis=1)[None, :]
    )
    labels = np.argmin(d2, axis=1)
    cost = float(np.maximum(np.take_along_axis(d2, labels[:, None], axis=1), 0.0).sum())
    return labels, centers, cost


def kmeans_fit(ds: Dataset, k: int, restarts: int = 10, seed: int = 0,
               max_iter: int = 100) -> ReferenceClustering:
    """Lloyd's algorithm with k-means++ seeding and deterministic restarts.

    The restart with the smallest cost wins; ties go to the lower restart index.
    """
    if not 1 <= k <= ds.n:
        raise DataError(f"k={k} must satisfy 1 <= k <= n={ds.n}")
    if restarts < 1:
        raise DataError("restarts must be >= 1")
    best = None
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        centers = _kmeans_pp_seed(ds.points, k, rng)
        labels, centers, cost = _lloyd(ds.points, centers.copy(), max_iter)
        if best is None or cost < best[0]:
            best = (cost, labels, centers)
    _, labels, centers = best
    labels, k_eff = relabel_contiguous(labels)
    # Empty-cluster repair keeps all k clusters populated in practice, but a
    # degenerate dataset can still collapse some; re-derive centroids per label.
    centroids = np.stack([ds.points[labels == i].mean(axis=0) for i in range(k_eff)])
    return ReferenceClustering(labels=labels, k=k_eff, centroids=centroids)


def coordinatewise_median(points: np.ndarray) -> np.ndarray:
    """Lower median per coordinate (exact l1 minimizer, deterministic on ties)."""
    srt = np.sort(points, axis=0)
    return srt[(points.shape[0] - 1) // 2]


def costs(ds: Dataset, ref: ReferenceClustering) -> CostReport:
    """k-means (squared l2, stored centroids) and k-medians (l1, recomputed medians)."""
    if ref.centroids is None:
        raise DataError("kmeans_cost requires centroids")
    if ref.n != ds.n:
        raise DataError("labeling length does not match dataset")
    km = 0.0
    kmed = 0.0
    for i in range(ref.k):
        members = ds.points[ref.labels == i]
        km += float(np.sum((members - ref.centroids[i]) ** 2))
        med = coordinatewise_median(members)
        kmed += float(np.sum(np.abs(members - med)))
    return CostReport(kmeans_cost=km, kmedians_l1_cost=kmed)


def kmedians_cost(ds: Dataset, labels: np.ndarray) -> float:
    """Total l1 cost against per-cluster coordinate-wise medians."""
    total = 0.0
    for lab in np.unique(labels):
        members = ds.points[labels == lab]
        med = coordinatewise_median(members)
        total += float(np.sum(np.abs(members - med)))
    return total


def _synth_two_moons(n, noise, rng):
    n_a = n // 2
    n_b = n - n_a
    # Two interleaving half-circle arcs. The lower arc is offset so that a
    # single horizontal cut through the gap leaves only noise-induced errors.
    gap = 0.3
    t_a = np.linspace(0.0, np.pi, n_a)
    t_b = np.linspace(0.0, np.pi, n_b)
    pts = np.empty((n, 2))
    pts[:n_a, 0] = np.cos(t_a)
    pts[:n_a, 1] = np.sin(t_a)
    pts[n_a:, 0] = 1.0 - np.cos(t_b)
    pts[n_a:, 1] = -gap - np.sin(t_b)
    pts += noise * rng.standard_normal(pts.shape)
    labels = np.concatenate([np.zeros(n_a, np.int64), np.ones(n_b, np.int64)])
    return pts, labels


def _synth_three_gaussians(n, noise, rng):
    means = np.array([[0.0, 0.0], [4.0, 0.0], [2.0, 3.5]])
    sizes = [n // 3, n // 3, n - 2 * (n // 3)]
    scale = noise if noise > 0 else 0.8
    chunks, labels = [], []
    for i, sz in enumerate(sizes):
        chunks.append(means[i] + scale * rng.standard_normal((sz, 2)))
        labels.append(np.full(sz, i, np.int64))
    return np.vstack(chunks), np.concatenate(labels)


def _min_depth2_errors_vertical(points, labels):
    """Lower bound on misassigned points for any tree whose root cut is vertical."""
    best = None
    xs = np.unique(points[:, 0])
    for a, b in zip(xs[:-1], xs[1:]):
        tau = 0.5 * (a + b)
        left = points[:, 0] <= tau
        errs = 0
        for lab in np.unique(labels):
            in_l = int(np.sum(left & (labels == lab)))
            errs += min(in_l, int(np.sum(labels == lab)) - in_l)
        if best is None or errs < best:
            best = errs
    return best


def _has_zero_error_horizontal_tree(points, labels):
    """Does some horizontal root cut start an error-free depth-2 tree?"""
    ys = np.unique(points[:, 1])
    for a, b in zip(ys[:-1], ys[1:]):
        tau = 0.5 * (a + b)
        low = points[:, 1] <= tau
        for side in (low, ~low):
            side_labels = set(labels[side].tolist())
            other_labels = set(labels[~side].tolist())
            if side_labels & other_labels:
                continue
            if len(other_labels) == 1 and len(side_labels) == 2 and _splittable(
                points[side], labels[side]
            ):
                return True
    return False


def _splittable(points, labels):
    """Is there a single coordinate cut separating the two classes exactly?"""
    for j in range(points.shape[1]):
        vals = np.unique(points[:, j])
        for a, b in zip(vals[:-1], vals[1:]):
            tau = 0.5 * (a + b)
            left = points[:, j] <= tau
            if len(set(labels[left].tolist())) == 1 and len(
                set(labels[~left].tolist())
            ) == 1 and labels[left][0] != labels[~left][0]:
                return True
    return False


def _synth_cart_trap(n, noise, rng):
    # Three axis-aligned rectangles: two large clusters side by side at the
    # bottom with a narrow vertical gap, and a smaller wide cluster on top
    # spanning the gap. Impurity-minimizing root cuts are vertical (through
    # the gap, slicing the top cluster); a horizontal root cut is error-free.
    n_top = max(4, int(round(n * 2.0 / 15.0)))
    n_left = (n - n_top) // 2
    n_right = n - n_top - n_left
    jitter = noise

    def rect(count, x0, x1, y0, y1):
        pts = rng.uniform([x0, y0], [x1, y1], size=(count, 2))
        if jitter > 0:
            pts += jitter * rng.standard_normal(pts.shape)
        return pts

    pts = np.vstack(
        [
            rect(n_left, 0.0, 4.0, 0.0, 2.0),
            rect(n_right, 6.0, 10.0, 0.0, 2.0),
            rect(n_top, 0.0, 10.0, 3.0, 5.0),
        ]
    )
    labels = np.concatenate(
        [
            np.zeros(n_left, np.int64),
            np.ones(n_right, np.int64),
            np.full(n_top, 2, np.int64),
        ]
    )
    # Self-check: the instance must actually exhibit the failure mode.
    if not _has_zero_error_horizontal_tree(pts, labels):
        raise DataError("cart_trap self-check failed: no zero-error horizontal tree")
    if _min_depth2_errors_vertical(pts, labels) < 1:
        raise DataError("cart_trap self-check failed: a vertical root cut is error-free")
    return pts, labels


_SYNTH_KINDS = {
    "two_moons": _synth_two_moons,
    "three_gaussians": _synth_three_gaussians,
    "cart_trap": _synth_cart_trap,
}


def synth(kind: str, n: int, noise: float = 0.0, seed: int = 0):
    """Deterministic synthetic datasets. Returns (Dataset, ground-truth labels)."""
    if kind not in _SYNTH_KINDS:
        raise DataError(f"unknown synthetic kind {kind!r}")
    if n < 6:
        raise DataError("n must be >= 6")
    if noise < 0:
        raise DataError("noise must be >= 0")
    rng = np.random.default_rng(seed)
    pts, labels = _SYNTH_KINDS[kind](n, noise, rng)
    return Dataset(pts), labels
