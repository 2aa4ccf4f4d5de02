"""DBSCAN under cosine distance, producing the per-epoch pseudo labels."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .core import OUTLIER, ClusterAssignment, pairwise_cosine_distance
from .exceptions import ConfigError, EmptyInput


@dataclass(frozen=True)
class DbscanParams:
    eps: float = 0.5
    min_pts: int = 4

    def __post_init__(self):
        if not 0.0 < self.eps < 2.0:
            raise ConfigError(f"eps must lie in (0, 2), got {self.eps}")
        if int(self.min_pts) != self.min_pts or self.min_pts < 2:
            raise ConfigError(f"min_pts must be an integer >= 2, got {self.min_pts}")


def relabel_by_first_member(labels: np.ndarray) -> ClusterAssignment:
    """Renumber cluster ids 0..C-1 in order of each cluster's smallest index."""
    labels = np.asarray(labels, dtype=np.int64)
    out = np.full_like(labels, OUTLIER)
    mapping = {}
    for i, lab in enumerate(labels):
        if lab == OUTLIER:
            continue
        if lab not in mapping:
            mapping[lab] = len(mapping)
        out[i] = mapping[lab]
    return ClusterAssignment(out, len(mapping))


def dbscan(features, params: DbscanParams = DbscanParams()) -> ClusterAssignment:
    """Cluster unit-norm rows with DBSCAN.

    A point is core when at least ``min_pts`` points (itself included) lie
    within cosine distance ``eps``. Seeds are visited in ascending index order
    and expanded breadth-first, so a border point reachable from several
    clusters joins the one seeded first.
    """
    features = np.asarray(features, dtype=np.float64)
    n = features.shape[0]
    if n == 0:
        raise EmptyInput("dbscan on zero samples")
    adjacency = pairwise_cosine_distance(features) <= params.eps
    neighbors = [np.flatnonzero(row) for row in adjacency]
    core = np.array([nb.size >= params.min_pts for nb in neighbors])

    labels = np.full(n, OUTLIER, dtype=np.int64)
    next_id = 0
    for seed in range(n):
        if labels[seed] != OUTLIER or not core[seed]:
            continue
        labels[seed] = next_id
        queue = deque([seed])
        while queue:
            p = queue.popleft()
            if not core[p]:
                continue
            for q in neighbors[p]:
                if labels[q] == OUTLIER:
                    labels[q] = next_id
                    queue.append(q)
        next_id += 1
    return relabel_by_first_member(labels)


def demote_singletons(assign: ClusterAssignment) -> ClusterAssignment:
    """Mark members of size-one clusters as outliers and renumber the rest."""
    sizes = assign.sizes()
    labels = assign.labels.copy()
    clustered = assign.clustered
    single = clustered.copy()
    single[clustered] = sizes[labels[clustered]] < 2
    labels[single] = OUTLIER
    return relabel_by_first_member(labels)


def cluster_members(assign: ClusterAssignment) -> list[list[int]]:
    members = [[] for _ in range(assign.num_clusters)]
    for i, lab in enumerate(assign.labels):
        if lab != OUTLIER:
            members[lab].append(i)
    return members
