"""Centroid memory bank: construction, momentum updates and δ schedules."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .clustering import cluster_members
from .confidence import ConfidenceReport
from .core import ClusterAssignment, l2_normalize_rows
from .exceptions import ConfigError, EmptyPartition

VANILLA = "vanilla"
CONFIDENCE_GUIDED = "confidence_guided"


@dataclass
class CentroidBank:
    """Unit-norm cluster centroids kept up to date during an epoch.

    ``member_counts`` holds cluster sizes and ``used_counts`` the number of
    members that actually entered each centroid at construction time.
    """

    centroids: np.ndarray
    mode: str = VANILLA
    momentum: float = 0.2
    member_counts: np.ndarray | None = None
    used_counts: np.ndarray | None = None

    def __post_init__(self):
        if not 0.0 <= self.momentum <= 1.0:
            raise ConfigError("momentum must lie in [0, 1]")
        self.centroids = np.array(self.centroids, dtype=np.float64)

    @property
    def num_clusters(self) -> int:
        return self.centroids.shape[0]

    def momentum_update(self, cluster_id: int, f) -> None:
        momentum_update(self, cluster_id, f)


def _mean_direction(rows: np.ndarray) -> np.ndarray:
    return l2_normalize_rows(rows.mean(axis=0, keepdims=True))[0]


def vanilla_centroids(assign: ClusterAssignment, features, momentum: float = 0.2) -> CentroidBank:
    members = cluster_members(assign)
    if not members:
        raise EmptyPartition("no clusters to build centroids from")
    features = np.asarray(features, dtype=np.float64)
    cents = np.stack([_mean_direction(features[m]) for m in members])
    counts = np.array([len(m) for m in members])
    return CentroidBank(cents, VANILLA, momentum, counts, counts.copy())


def confidence_guided_centroids(
    assign: ClusterAssignment,
    features,
    conf: ConfidenceReport,
    delta: float,
    momentum: float = 0.2,
) -> CentroidBank:
    """Centroids over members with silhouette strictly above ``delta``.

    A cluster with no member above the threshold keeps its all-member centroid.
    """
    members = cluster_members(assign)
    if not members:
        raise EmptyPartition("no clusters to build centroids from")
    features = np.asarray(features, dtype=np.float64)
    cents, used = [], []
    for m in members:
        m = np.asarray(m)
        kept = m[conf.scores[m] > delta]
        if kept.size == 0:
            kept = m
        cents.append(_mean_direction(features[kept]))
        used.append(kept.size)
    counts = np.array([len(m) for m in members])
    return CentroidBank(np.stack(cents), CONFIDENCE_GUIDED, momentum, counts, np.array(used))


def momentum_update(bank: CentroidBank, cluster_id: int, f) -> None:
    """``m <- mu * m + (1 - mu) * f`` followed by re-normalization, in place."""
    if not 0 <= cluster_id < bank.num_clusters:
        raise IndexError(f"cluster id {cluster_id} out of range for {bank.num_clusters} clusters")
    mixed = bank.momentum * bank.centroids[cluster_id] + (1.0 - bank.momentum) * np.asarray(f, dtype=np.float64)
    bank.centroids[cluster_id] = l2_normalize_rows(mixed[None, :])[0]


# -- threshold schedules -----------------------------------------------------

LINEAR, DYNAMIC, CONSTANT = "linear", "dynamic", "constant"


@dataclass(frozen=True)
class ThresholdSchedule:
    kind: str = LINEAR
    delta0: float = 0.2
    epsilon: float = -0.1
    constant_value: float = 0.0
    total_epochs: int | None = None

    def __post_init__(self):
        if self.kind not in (LINEAR, DYNAMIC, CONSTANT):
            raise ConfigError(f"unknown schedule kind {self.kind!r}")

    def with_total(self, total_epochs: int) -> "ThresholdSchedule":
        if self.total_epochs is not None:
            return self
        return ThresholdSchedule(self.kind, self.delta0, self.epsilon, self.constant_value, total_epochs)

    def label(self) -> str:
        if self.kind == CONSTANT:
            return f"constant({self.constant_value:g})"
        return self.kind


def threshold_at(sched: ThresholdSchedule, t: int) -> float:
    """Silhouette threshold for epoch ``t``.

    linear:   delta0 * t / T + epsilon
    dynamic:  delta0 * tanh(0.1 * (t - T / 2))
    constant: constant_value
    """
    T = sched.total_epochs
    if sched.kind == CONSTANT:
        value = float(sched.constant_value)
    else:
        if not T:
            raise ConfigError(f"{sched.kind} schedule needs total_epochs > 0")
        if not 0 <= t <= T:
            raise ConfigError(f"epoch {t} outside [0, {T}]")
        if sched.kind == LINEAR:
            value = sched.delta0 * t / T + sched.epsilon
        else:
            value = sched.delta0 * math.tanh(0.1 * (t - T / 2))
    if not -1.0 < value < 1.0:
        raise ConfigError(f"threshold {value} outside (-1, 1)")
    return value


def write_bank_csv(path, snapshots) -> None:
    """Write ``(epoch, bank)`` pairs as one row per centroid."""
    snapshots = list(snapshots)
    d = max((b.centroids.shape[1] for _, b in snapshots), default=0)
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "cluster_id", "member_count", "filtered_count"] + [f"c_{j}" for j in range(d)])
        for epoch, bank in snapshots:
            for c, row in enumerate(bank.centroids):
                writer.writerow(
                    [epoch, c, int(bank.member_counts[c]), int(bank.used_counts[c])]
                    + [format(float(x), ".17g") for x in row]
                )
