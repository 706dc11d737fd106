"""Clustering agreement indices and the multi-way tree objective."""

from __future__ import annotations

from dataclasses import dataclass
from math import lgamma, log

import numpy as np

from .graph import cut_measures


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class AgreementReport:
    ari: float
    ami: float
    ref_ari: float | None = None

    def as_dict(self):
        out = {"ARI": self.ari, "AMI": self.ami}
        if self.ref_ari is not None:
            out["REF"] = self.ref_ari
        return out


def _contingency(a, b):
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.size != b.size:
        raise MetricError(f"label length mismatch: {a.size} vs {b.size}")
    if a.size < 2:
        raise MetricError("need at least 2 samples")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    r, c = ai.max() + 1, bi.max() + 1
    table = np.zeros((r, c), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    return table


def _comb2(x):
    return x * (x - 1) // 2


def ari(a, b) -> float:
    """Adjusted Rand index (Hubert-Arabie) over the contingency table.

    All pair counts are integers, so the index is computed as an exact
    integer ratio before the final division.
    """
    table = _contingency(a, b)
    n = int(table.sum())
    sum_ij = int(np.sum(_comb2(table)))
    sum_a = int(np.sum(_comb2(table.sum(axis=1))))
    sum_b = int(np.sum(_comb2(table.sum(axis=0))))
    c = _comb2(n)
    # (sum_ij - sum_a sum_b / C) / ((sum_a + sum_b)/2 - sum_a sum_b / C),
    # cleared of denominators
    num = 2 * (sum_ij * c - sum_a * sum_b)
    den = (sum_a + sum_b) * c - 2 * sum_a * sum_b
    if den == 0:
        return 1.0  # both partitions trivial and identical
    return num / den


def _entropy(counts, n):
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def _expected_mi(row_sums, col_sums, n):
    """E[MI] under the permutation (hypergeometric) model, in nats."""
    emi = 0.0
    lg_n = lgamma(n + 1)
    for a in row_sums:
        for b in col_sums:
            lo = max(1, a + b - n)
            hi = min(a, b)
            for nij in range(lo, hi + 1):
                log_p = (
                    lgamma(a + 1) + lgamma(b + 1)
                    + lgamma(n - a + 1) + lgamma(n - b + 1)
                    - lg_n - lgamma(nij + 1) - lgamma(a - nij + 1)
                    - lgamma(b - nij + 1) - lgamma(n - a - b + nij + 1)
                )
                emi += np.exp(log_p) * (nij / n) * log(n * nij / (a * b))
    return emi


def ami(a, b) -> float:
    """Adjusted mutual information, arithmetic-mean normalization, in nats.

    Conventions: 1.0 when the labelings are identical (including both
    constant); 0.0 when exactly one labeling is constant.
    """
    table = _contingency(a, b)
    n = int(table.sum())
    row_sums = table.sum(axis=1)
    col_sums = table.sum(axis=0)
    a_const = row_sums.size == 1
    b_const = col_sums.size == 1
    if a_const and b_const:
        return 1.0
    if a_const or b_const:
        return 0.0
    mi = 0.0
    for i in range(table.shape[0]):
        for j in range(table.shape[1]):
            nij = table[i, j]
            if nij > 0:
                mi += nij / n * log(n * nij / (row_sums[i] * col_sums[j]))
    emi = _expected_mi(row_sums.tolist(), col_sums.tolist(), n)
    h_mean = 0.5 * (_entropy(row_sums, n) + _entropy(col_sums, n))
    denom = h_mean - emi
    if denom == 0.0:
        return 1.0 if mi == emi else 0.0
    return (mi - emi) / denom


def agreement(pred, ground_truth=None, reference=None) -> AgreementReport:
    """Agreement of a predicted labeling with ground truth and/or reference."""
    gt = ground_truth if ground_truth is not None else reference
    if gt is None:
        raise MetricError("need ground truth or reference labels")
    return AgreementReport(
        ari=ari(pred, gt),
        ami=ami(pred, gt),
        ref_ari=ari(pred, reference) if reference is not None else None,
    )


def tree_objective(g, partition) -> float:
    """Sum of leaf conductances against the global graph."""
    seen = np.concatenate([np.asarray(p, dtype=np.int64) for p in partition])
    if seen.size != g.n or np.unique(seen).size != g.n:
        raise MetricError("partition must cover the vertex set disjointly")
    return float(sum(cut_measures(g, p).psi for p in partition))


def report_text(report: AgreementReport) -> str:
    rows = list(report.as_dict().items())
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v: .6f}" for k, v in rows)
