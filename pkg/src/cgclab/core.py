"""Domain types and metric-space primitives shared by every module."""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from .exceptions import EmptyInput, ZeroVector

OUTLIER = -1


def cosine_similarity(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ZeroVector("cosine similarity of a zero vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def cosine_distance(u, v) -> float:
    return 1.0 - cosine_similarity(u, v)


def l2_normalize_rows(m) -> np.ndarray:
    """Scale every row of ``m`` to unit L2 norm.

    Raises
    ------
    ZeroVector
        If any row is all zeros; the offending row index is attached.
    """
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    norms = np.linalg.norm(m, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise ZeroVector("cannot normalize zero row", row=int(zero[0]))
    return m / norms[:, None]


def normalize(v) -> np.ndarray:
    return l2_normalize_rows(np.asarray(v, dtype=np.float64)[None, :])[0]


def pairwise_cosine_distance(a, b=None) -> np.ndarray:
    """Cosine distance matrix between unit-norm row sets, clipped to [0, 2]."""
    a = np.asarray(a, dtype=np.float64)
    b = a if b is None else np.asarray(b, dtype=np.float64)
    return np.clip(1.0 - a @ b.T, 0.0, 2.0)


def derive_rng(seed: int, name: str) -> np.random.Generator:
    """Independent, reproducible generator for the named stream of a run."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(name.encode())])


@dataclass
class FeatureStore:
    """Learnable per-sample parameters and their unit-norm features."""

    params: np.ndarray
    features: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.params = np.array(self.params, dtype=np.float64)
        if self.params.ndim != 2 or self.params.shape[0] == 0:
            raise EmptyInput("FeatureStore needs a non-empty N x d matrix")
        self.refresh()

    @property
    def count(self) -> int:
        return self.params.shape[0]

    @property
    def dim(self) -> int:
        return self.params.shape[1]

    def refresh(self) -> np.ndarray:
        self.features = l2_normalize_rows(self.params)
        return self.features

    def copy(self) -> "FeatureStore":
        return FeatureStore(self.params.copy())


@dataclass
class ClusterAssignment:
    """Per-sample cluster ids; ``OUTLIER`` (-1) marks unassigned samples."""

    labels: np.ndarray
    num_clusters: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.num_clusters = int(self.num_clusters)

    @property
    def count(self) -> int:
        return self.labels.shape[0]

    @property
    def clustered(self) -> np.ndarray:
        return self.labels != OUTLIER

    @property
    def num_outliers(self) -> int:
        return int(np.sum(self.labels == OUTLIER))

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels[self.clustered], minlength=self.num_clusters)


@dataclass
class GroundTruth:
    """True identities and camera tags; only evaluation and datagen read these."""

    identities: np.ndarray
    camera_ids: np.ndarray

    def __post_init__(self):
        self.identities = np.asarray(self.identities, dtype=np.int64)
        self.camera_ids = np.asarray(self.camera_ids, dtype=np.int64)
        if self.identities.shape != self.camera_ids.shape:
            raise ValueError("identities and camera_ids must have equal length")

    def __len__(self):
        return self.identities.shape[0]
