"""Confidence-guided soft pseudo labels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .core import OUTLIER, pairwise_cosine_distance
from .exceptions import ConfigError, EmptyBank


@dataclass
class SoftLabelMatrix:
    """Row-stochastic targets; rows of outlier samples are all-NaN and masked out."""

    labels: np.ndarray
    beta: float
    valid_mask: np.ndarray


def distance_matrix(features, bank) -> np.ndarray:
    cents = getattr(bank, "centroids", bank)
    return 1.0 - np.asarray(features, dtype=np.float64) @ np.asarray(cents, dtype=np.float64).T


def confidence_matrix(D) -> np.ndarray:
    """Row-normalized ``sigmoid(-D)``."""
    D = np.atleast_2d(np.asarray(D, dtype=np.float64))
    if D.shape[1] == 0:
        raise EmptyBank("confidence matrix over zero centroids")
    p = expit(-D)
    return p / p.sum(axis=1, keepdims=True)


def confidence_guided_labels(cluster_ids, P, beta: float) -> SoftLabelMatrix:
    """``beta * onehot(y) + (1 - beta) * P`` for every non-outlier row."""
    if not 0.0 <= beta <= 1.0:
        raise ConfigError(f"beta must lie in [0, 1], got {beta}")
    labels_in = np.asarray(getattr(cluster_ids, "labels", cluster_ids), dtype=np.int64)
    P = np.atleast_2d(np.asarray(P, dtype=np.float64))
    n, c = P.shape
    valid = labels_in != OUTLIER
    if np.any(labels_in[valid] >= c) or np.any(labels_in[valid] < 0):
        raise IndexError("cluster id outside the confidence matrix columns")
    rows = np.flatnonzero(valid)
    onehot = np.zeros((rows.size, c))
    onehot[np.arange(rows.size), labels_in[rows]] = 1.0
    out = np.full((n, c), np.nan)
    out[rows] = beta * onehot + (1.0 - beta) * P[rows]
    return SoftLabelMatrix(out, beta, valid)


def one_hot(cluster_ids, num_clusters: int) -> np.ndarray:
    cluster_ids = np.asarray(cluster_ids, dtype=np.int64)
    out = np.zeros((cluster_ids.size, num_clusters))
    out[np.arange(cluster_ids.size), cluster_ids] = 1.0
    return out
