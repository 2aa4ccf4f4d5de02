"""Per-sample silhouette scores used as clustering confidence.

``a_i`` is the mean distance from sample ``i`` to the other members of its own
cluster, ``b_i`` the smallest mean distance to the members of any other cluster
and ``s_i = (b_i - a_i) / max(a_i, b_i)``. Samples in a size-one cluster score
0, as do all samples when the partition has a single cluster and samples with
``a_i = b_i = 0``.

Two normalizations of ``a_i`` are available: ``"canonical"`` divides the sum by
``|C_I| - 1`` (the number of terms) and ``"full_size"`` divides by ``|C_I|``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import OUTLIER, ClusterAssignment, cosine_distance, pairwise_cosine_distance
from .exceptions import ConfigError, SingleClusterPartition, SingletonCluster

DENOMINATORS = ("canonical", "full_size")


@dataclass
class ConfidenceReport:
    scores: np.ndarray
    valid_mask: np.ndarray

    @property
    def valid_scores(self) -> np.ndarray:
        return self.scores[self.valid_mask]

    def mean(self) -> float:
        v = self.valid_scores
        return float(v.mean()) if v.size else float("nan")


def _check_denominator(intra_denominator):
    if intra_denominator not in DENOMINATORS:
        raise ConfigError(f"intra_denominator must be one of {DENOMINATORS}")


def intra_distance(i, assign: ClusterAssignment, features, intra_denominator="canonical") -> float:
    _check_denominator(intra_denominator)
    lab = assign.labels[i]
    if lab == OUTLIER:
        raise ValueError(f"sample {i} is an outlier")
    mates = np.flatnonzero(assign.labels == lab)
    if mates.size < 2:
        raise SingletonCluster(f"sample {i} is alone in cluster {lab}")
    total = sum(cosine_distance(features[i], features[j]) for j in mates if j != i)
    denom = mates.size - 1 if intra_denominator == "canonical" else mates.size
    return total / denom


def nearest_other_distance(i, assign: ClusterAssignment, features) -> float:
    own = assign.labels[i]
    others = [c for c in range(assign.num_clusters) if c != own]
    if not others:
        raise SingleClusterPartition("only one cluster in the partition")
    best = np.inf
    for c in others:
        members = np.flatnonzero(assign.labels == c)
        best = min(best, np.mean([cosine_distance(features[i], features[j]) for j in members]))
    return float(best)


def silhouette_scores(assign: ClusterAssignment, features, intra_denominator="canonical") -> ConfidenceReport:
    """Vectorized silhouette scores for every clustered sample.

    Outliers get ``nan`` and ``valid_mask = False``.
    """
    _check_denominator(intra_denominator)
    features = np.asarray(features, dtype=np.float64)
    n = features.shape[0]
    labels = assign.labels
    valid = labels != OUTLIER
    scores = np.full(n, np.nan)
    idx = np.flatnonzero(valid)
    scores[idx] = 0.0
    c = assign.num_clusters
    if idx.size == 0 or c < 2:
        return ConfidenceReport(scores, valid)

    lab = labels[idx]
    dist = pairwise_cosine_distance(features[idx])
    onehot = np.zeros((idx.size, c))
    onehot[np.arange(idx.size), lab] = 1.0
    sums = dist @ onehot
    sizes = onehot.sum(axis=0)

    rows = np.arange(idx.size)
    own_size = sizes[lab]
    denom = own_size - 1 if intra_denominator == "canonical" else own_size
    a = np.where(own_size > 1, sums[rows, lab] / np.maximum(denom, 1), 0.0)
    means = sums / np.where(sizes > 0, sizes, 1)
    means[:, sizes == 0] = np.inf
    means[rows, lab] = np.inf
    b = means.min(axis=1)

    top = np.maximum(a, b)
    s = np.where(top > 0, (b - a) / np.where(top > 0, top, 1.0), 0.0)
    s[own_size < 2] = 0.0
    scores[idx] = np.clip(s, -1.0, 1.0)
    return ConfidenceReport(scores, valid)


def write_scores_csv(path, rows) -> None:
    """Write ``(epoch, assign, report)`` triples as ``epoch,sample_id,cluster_id,silhouette``.

    Outliers are skipped.
    """
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "sample_id", "cluster_id", "silhouette"])
        for epoch, assign, report in rows:
            for i in np.flatnonzero(report.valid_mask):
                writer.writerow([epoch, int(i), int(assign.labels[i]), repr(float(report.scores[i]))])
