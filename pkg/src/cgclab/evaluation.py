"""Retrieval metrics, identity consistency score and silhouette summaries."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .clustering import cluster_members
from .confidence import ConfidenceReport
from .core import ClusterAssignment, GroundTruth
from .exceptions import EvalError, ICSUndefined

HIST_BINS = 40
CMC_KS = (1, 5, 10)


@dataclass(frozen=True)
class EvalConfig:
    query_fraction: float = 0.2
    exclude_same_camera: bool = False
    ics_boundary_fraction: float = 0.05
    ics_min_cluster_size: int = 20
    ics_average: str = "boundary"


def _ranked_matches(features, query, gallery, truth: GroundTruth, exclude_same_camera=False):
    """Yield one boolean match vector per query, gallery sorted by similarity.

    Ties in similarity are broken by ascending gallery index.
    """
    features = np.asarray(features, dtype=np.float64)
    query = np.asarray(query, dtype=np.int64)
    gallery = np.asarray(gallery, dtype=np.int64)
    ids, cams = truth.identities, truth.camera_ids
    gallery_ids = set(ids[gallery].tolist())
    missing = [int(q) for q in query if ids[q] not in gallery_ids]
    if missing:
        raise EvalError(f"query identities absent from gallery (queries {missing[:5]})")
    sim = features[query] @ features[gallery].T
    for row, q in enumerate(query):
        order = np.lexsort((gallery, -sim[row]))
        ranked = gallery[order]
        if exclude_same_camera:
            ranked = ranked[~((ids[ranked] == ids[q]) & (cams[ranked] == cams[q]))]
        matches = ids[ranked] == ids[q]
        if matches.any():
            yield matches


def average_precision(matches) -> float:
    matches = np.asarray(matches, dtype=bool)
    hits = np.cumsum(matches)
    ranks = np.flatnonzero(matches) + 1
    return float(np.mean(hits[ranks - 1] / ranks))


def mean_average_precision(features, query, gallery, truth: GroundTruth, exclude_same_camera=False) -> float:
    aps = [average_precision(m) for m in _ranked_matches(features, query, gallery, truth, exclude_same_camera)]
    if not aps:
        raise EvalError("no query has a gallery match")
    return float(np.mean(aps))


def cmc_topk(features, query, gallery, truth: GroundTruth, ks=CMC_KS, exclude_same_camera=False) -> dict:
    """Fraction of queries with a true match within the top ``k`` gallery items."""
    first_hits = [int(np.argmax(m)) for m in _ranked_matches(features, query, gallery, truth, exclude_same_camera)]
    if not first_hits:
        raise EvalError("no query has a gallery match")
    first_hits = np.asarray(first_hits)
    return {int(k): float(np.mean(first_hits < k)) for k in ks}


def boundary_members(members, conf: ConfidenceReport, boundary_fraction: float) -> np.ndarray:
    """Members whose silhouette ranks in the bottom ``boundary_fraction``.

    The boundary set has ``floor(boundary_fraction * |C|)`` samples; ties are
    broken by sample index.
    """
    members = np.asarray(members, dtype=np.int64)
    k = int(np.floor(boundary_fraction * members.size + 1e-9))
    order = np.lexsort((members, conf.scores[members]))
    return members[order[:k]]


def identity_consistency_score(
    members,
    truth: GroundTruth,
    conf: ConfidenceReport,
    boundary_fraction: float = 0.05,
    weights_source: str = "vanilla",
    delta: float = 0.0,
    average: str = "boundary",
) -> float:
    """Identity weight of the cluster's centroid carried by its boundary samples.

    Identity weights ``q_k`` are identity frequencies over all members
    (``"vanilla"``) or over the members with silhouette above ``delta``
    (``"cgc"``; all members when none pass). The score is the mean of
    ``q_{g_i}`` over the boundary samples, or over all members when
    ``average="members"``.
    """
    members = np.asarray(members, dtype=np.int64)
    ids = truth.identities
    if weights_source == "vanilla":
        pool = members
    elif weights_source == "cgc":
        pool = members[conf.scores[members] > delta]
        if pool.size == 0:
            pool = members
    else:
        raise ValueError(f"unknown weights_source {weights_source!r}")
    uniq, counts = np.unique(ids[pool], return_counts=True)
    q = dict(zip(uniq.tolist(), (counts / pool.size).tolist()))

    if average == "boundary":
        targets = boundary_members(members, conf, boundary_fraction)
    elif average == "members":
        targets = members
    else:
        raise ValueError(f"unknown average {average!r}")
    if targets.size == 0:
        raise ICSUndefined("empty boundary set")
    return float(np.mean([q.get(int(g), 0.0) for g in ids[targets]]))


def epoch_ics(
    assign: ClusterAssignment,
    truth: GroundTruth,
    conf: ConfidenceReport,
    delta: float,
    cfg: EvalConfig = EvalConfig(),
) -> dict:
    """Mean ICS over clusters of at least ``cfg.ics_min_cluster_size`` members."""
    out = {}
    for source in ("vanilla", "cgc"):
        vals = []
        for members in cluster_members(assign):
            if len(members) < cfg.ics_min_cluster_size:
                continue
            try:
                vals.append(
                    identity_consistency_score(
                        members, truth, conf, cfg.ics_boundary_fraction, source, delta, cfg.ics_average
                    )
                )
            except ICSUndefined:
                continue
        out[source] = float(np.mean(vals)) if vals else float("nan")
    return out


def silhouette_histogram(conf: ConfidenceReport, bins: int = HIST_BINS) -> np.ndarray:
    counts, _ = np.histogram(conf.valid_scores, bins=bins, range=(-1.0, 1.0))
    return counts


def pca_2d(features) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    x = x - x.mean(axis=0)
    _, _, vt = np.linalg.svd(x, full_matrices=False)
    coords = x @ vt[:2].T
    # fix the sign of each axis so exports are reproducible
    signs = np.sign(coords[np.argmax(np.abs(coords), axis=0), [0, 1]])
    return coords * np.where(signs == 0, 1.0, signs)


def write_pca_csv(path, features, truth: GroundTruth) -> None:
    coords = pca_2d(features)
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sample_id", "identity", "x", "y"])
        for i, (x, y) in enumerate(coords):
            writer.writerow([i, int(truth.identities[i]), repr(float(x)), repr(float(y))])


@dataclass
class EpochMetrics:
    epoch: int
    mAP: float
    cmc: dict
    ics_vanilla: float
    ics_cgc: float
    silhouette_histogram: np.ndarray


@dataclass
class MetricsTimeline:
    records: list = field(default_factory=list)

    def append(self, rec: EpochMetrics) -> None:
        self.records.append(rec)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def final(self) -> EpochMetrics | None:
        return self.records[-1] if self.records else None
