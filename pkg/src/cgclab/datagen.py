"""Synthetic identity datasets on the unit sphere.

Each identity owns an anchor direction. A sample is the normalized sum of its
identity anchor, a per-(identity, camera) offset and isotropic gaussian noise.
A random subset of samples gets the larger ``boundary_sigma`` noise and plays
the role of low-confidence boundary samples.

Noise scales are *norms*: a gaussian with scale ``s`` in ``d`` dimensions uses a
per-coordinate standard deviation of ``s / sqrt(d)``, so the expected angular
spread does not change with ``dim``.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import GroundTruth, derive_rng, l2_normalize_rows
from .exceptions import ConfigError, SplitError


@dataclass(frozen=True)
class DatasetSpec:
    num_identities: int = 20
    samples_per_identity: int = 30
    dim: int = 32
    noise_sigma: float = 0.25
    boundary_fraction: float = 0.15
    boundary_sigma: float = 0.9
    num_cameras: int = 3
    camera_bias_sigma: float = 0.5
    seed: int = 0

    @property
    def n(self) -> int:
        return self.num_identities * self.samples_per_identity

    def validate(self) -> None:
        if self.dim < 2:
            raise ConfigError("dim must be >= 2")
        if self.num_identities < 2:
            raise ConfigError("num_identities must be >= 2")
        if self.samples_per_identity < 1:
            raise ConfigError("samples_per_identity must be positive")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be >= 0")
        if not 0.0 <= self.boundary_fraction <= 1.0:
            raise ConfigError("boundary_fraction must lie in [0, 1]")
        if self.boundary_sigma < self.noise_sigma:
            raise ConfigError("boundary_sigma must be >= noise_sigma")
        if self.num_cameras < 1:
            raise ConfigError("num_cameras must be >= 1")
        if self.camera_bias_sigma < 0:
            raise ConfigError("camera_bias_sigma must be >= 0")

    @classmethod
    def from_dict(cls, data: dict) -> "DatasetSpec":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown dataset spec keys: {sorted(unknown)}")
        try:
            spec = cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        spec.validate()
        return spec


@dataclass
class Dataset:
    observations: np.ndarray
    truth: GroundTruth
    spec: DatasetSpec
    boundary_mask: np.ndarray

    @property
    def n(self) -> int:
        return self.observations.shape[0]


def generate(spec: DatasetSpec) -> Dataset:
    """Draw a dataset; identical specs (seed included) give identical output."""
    spec.validate()
    rng = derive_rng(spec.seed, "datagen")
    n_id, k, d = spec.num_identities, spec.samples_per_identity, spec.dim
    scale = 1.0 / np.sqrt(d)

    anchors = l2_normalize_rows(rng.standard_normal((n_id, d)))
    cam_offsets = rng.standard_normal((n_id, spec.num_cameras, d)) * (spec.camera_bias_sigma * scale)

    identities = np.repeat(np.arange(n_id), k)
    cameras = np.tile(np.arange(k) % spec.num_cameras, n_id)
    n = n_id * k
    n_boundary = int(round(spec.boundary_fraction * n))
    boundary = np.zeros(n, dtype=bool)
    boundary[rng.choice(n, size=n_boundary, replace=False)] = True
    sigma = np.where(boundary, spec.boundary_sigma, spec.noise_sigma) * scale

    raw = anchors[identities] + cam_offsets[identities, cameras] + rng.standard_normal((n, d)) * sigma[:, None]
    return Dataset(
        observations=l2_normalize_rows(raw),
        truth=GroundTruth(identities, cameras),
        spec=spec,
        boundary_mask=boundary,
    )


def split_query_gallery(truth: GroundTruth, query_fraction: float, seed: int):
    """Disjoint query / gallery index lists covering every sample.

    Each identity contributes ``round(query_fraction * n_k)`` queries, clamped
    to ``[1, n_k - 1]`` so every query keeps at least one gallery match.
    """
    if not 0.0 < query_fraction < 1.0:
        raise SplitError("query_fraction must lie in (0, 1)")
    rng = derive_rng(seed, "split")
    query, gallery = [], []
    for ident in np.unique(truth.identities):
        members = np.flatnonzero(truth.identities == ident)
        if members.size < 2:
            raise SplitError(f"identity {ident} has a single sample")
        n_q = min(max(int(round(query_fraction * members.size)), 1), members.size - 1)
        picked = rng.permutation(members)
        query.extend(picked[:n_q].tolist())
        gallery.extend(picked[n_q:].tolist())
    return sorted(query), sorted(gallery)


# -- file format -----------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_dataset(dataset: Dataset, out_dir, stem: str = "dataset"):
    """Write ``<stem>.json`` (header) and ``<stem>.csv`` (body); return the fingerprint."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    d = dataset.observations.shape[1]
    csv_path = out / f"{stem}.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sample_id", "identity", "camera"] + [f"f_{j}" for j in range(d)])
        for i, row in enumerate(dataset.observations):
            writer.writerow(
                [i, int(dataset.truth.identities[i]), int(dataset.truth.camera_ids[i])]
                + [_fmt(x) for x in row]
            )
    fingerprint = file_fingerprint(csv_path)
    header = {
        "n": dataset.n,
        "d": d,
        "num_identities": dataset.spec.num_identities,
        "seed": dataset.spec.seed,
        "spec": dataclasses.asdict(dataset.spec),
        "boundary": np.flatnonzero(dataset.boundary_mask).tolist(),
        "fingerprint": fingerprint,
    }
    (out / f"{stem}.json").write_text(json.dumps(header, indent=2) + "\n")
    return fingerprint


def load_dataset(path, stem: str = "dataset") -> Dataset:
    """Read a dataset written by :func:`save_dataset`.

    ``path`` may be the directory, the header or the CSV file.
    """
    path = Path(path)
    if path.is_dir():
        header_path, csv_path = path / f"{stem}.json", path / f"{stem}.csv"
    else:
        header_path, csv_path = path.with_suffix(".json"), path.with_suffix(".csv")
    header = json.loads(header_path.read_text())
    spec = DatasetSpec.from_dict(header["spec"])
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    if len(rows) != header["n"]:
        raise ConfigError(f"expected {header['n']} rows, found {len(rows)}")
    ids = np.array([int(r[1]) for r in rows], dtype=np.int64)
    cams = np.array([int(r[2]) for r in rows], dtype=np.int64)
    obs = np.array([[float(x) for x in r[3:]] for r in rows], dtype=np.float64)
    boundary = np.zeros(len(rows), dtype=bool)
    boundary[header.get("boundary", [])] = True
    return Dataset(obs, GroundTruth(ids, cams), spec, boundary)


def file_fingerprint(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
