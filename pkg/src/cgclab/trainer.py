"""Alternating clustering / contrastive training over a learnable embedding table.

Each epoch clusters the current features, scores every clustered sample with
its silhouette, builds the centroid bank (confidence-guided or vanilla) and
then runs PK-sampled SGD iterations against the live, momentum-updated bank.
Ground-truth identities never enter this module's training path; they are
handed to the evaluation callback only.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from . import evaluation
from .centroids import CentroidBank, ThresholdSchedule, confidence_guided_centroids, threshold_at, vanilla_centroids
from .clustering import DbscanParams, cluster_members, dbscan, demote_singletons
from .confidence import DENOMINATORS, ConfidenceReport, silhouette_scores
from .core import ClusterAssignment, FeatureStore, derive_rng
from .datagen import Dataset, split_query_gallery
from .evaluation import EvalConfig, EpochMetrics, MetricsTimeline
from .exceptions import ConfigError
from .labeling import confidence_guided_labels, confidence_matrix, distance_matrix, one_hot
from .objective import batch_loss_and_grad

ABLATIONS = {
    "baseline": (False, False),
    "cgc": (True, False),
    "cgl": (False, True),
    "full": (True, True),
}


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 15
    iters_per_epoch: int | None = None
    batch_identities: int = 8
    batch_instances: int = 4
    learning_rate: float = 0.05
    lr_decay_epochs: tuple = ()
    temperature: float = 0.05
    momentum: float = 0.2
    beta: float = 0.8
    schedule: ThresholdSchedule = ThresholdSchedule()
    dbscan: DbscanParams = DbscanParams()
    use_cgc: bool = True
    use_cgl: bool = True
    intra_denominator: str = "canonical"
    seed: int = 0
    eval: EvalConfig = EvalConfig()

    def __post_init__(self):
        object.__setattr__(self, "lr_decay_epochs", tuple(int(e) for e in self.lr_decay_epochs))
        self.validate()

    def validate(self) -> None:
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if self.iters_per_epoch is not None and self.iters_per_epoch < 1:
            raise ConfigError("iters_per_epoch must be positive")
        if self.batch_identities < 1 or self.batch_instances < 1:
            raise ConfigError("batch shape must be positive")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be > 0")
        if not self.temperature > 0:
            raise ConfigError("temperature must be > 0")
        if not 0.0 <= self.momentum <= 1.0:
            raise ConfigError("momentum must lie in [0, 1]")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError("beta must lie in [0, 1]")
        if self.intra_denominator not in DENOMINATORS:
            raise ConfigError(f"intra_denominator must be one of {DENOMINATORS}")
        if not 0.0 < self.eval.query_fraction < 1.0:
            raise ConfigError("eval.query_fraction must lie in (0, 1)")

    @property
    def threshold_schedule(self) -> ThresholdSchedule:
        return self.schedule.with_total(self.epochs)

    def with_ablation(self, name: str) -> "TrainConfig":
        if name not in ABLATIONS:
            raise ConfigError(f"unknown ablation {name!r}; expected one of {sorted(ABLATIONS)}")
        use_cgc, use_cgl = ABLATIONS[name]
        return dataclasses.replace(self, use_cgc=use_cgc, use_cgl=use_cgl)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["lr_decay_epochs"] = list(self.lr_decay_epochs)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        nested = {"schedule": ThresholdSchedule, "dbscan": DbscanParams, "eval": EvalConfig}
        data = dict(data)
        _reject_unknown(cls, data, "config")
        for key, sub in nested.items():
            if key in data:
                if not isinstance(data[key], dict):
                    raise ConfigError(f"{key} must be an object")
                _reject_unknown(sub, data[key], key)
                try:
                    data[key] = sub(**data[key])
                except TypeError as exc:
                    raise ConfigError(str(exc)) from exc
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def _reject_unknown(cls, data, where):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")


@dataclass
class EpochTrace:
    epoch: int
    num_clusters: int
    num_outliers: int
    mean_silhouette: float
    loss_curve: list
    delta_used: float
    degenerate: bool = False
    assignment: ClusterAssignment | None = field(default=None, repr=False)
    confidence: ConfidenceReport | None = field(default=None, repr=False)
    bank: CentroidBank | None = field(default=None, repr=False)

    @property
    def mean_loss(self) -> float:
        return float(np.mean(self.loss_curve)) if self.loss_curve else float("nan")


@dataclass
class TrainState:
    store: FeatureStore
    rng: np.random.Generator
    learning_rate: float


def init_state(observations, config: TrainConfig) -> TrainState:
    return TrainState(FeatureStore(observations), derive_rng(config.seed, "train"), config.learning_rate)


def pk_sample(assign: ClusterAssignment, P: int, K: int, rng: np.random.Generator) -> np.ndarray:
    """Pick ``min(P, C)`` clusters, then ``K`` members of each.

    Members are drawn with replacement only when the cluster has fewer than
    ``K`` of them.
    """
    members = cluster_members(assign)
    chosen = rng.choice(len(members), size=min(P, len(members)), replace=False)
    batch = []
    for c in chosen:
        m = np.asarray(members[c])
        batch.append(rng.choice(m, size=K, replace=m.size < K))
    return np.concatenate(batch)


def cluster_epoch(features, config: TrainConfig):
    """Clustering and confidence scoring at the start of an epoch."""
    assign = demote_singletons(dbscan(features, config.dbscan))
    conf = silhouette_scores(assign, features, config.intra_denominator)
    return assign, conf


def run_epoch(state: TrainState, config: TrainConfig, t: int) -> EpochTrace:
    features = state.store.refresh()
    assign, conf = cluster_epoch(features, config)
    delta = threshold_at(config.threshold_schedule, t)
    if assign.num_clusters == 0:
        return EpochTrace(t, 0, assign.num_outliers, float("nan"), [], delta, True, assign, conf, None)

    if config.use_cgc:
        bank = confidence_guided_centroids(assign, features, conf, delta, config.momentum)
    else:
        bank = vanilla_centroids(assign, features, config.momentum)
    snapshot = dataclasses.replace(bank, centroids=bank.centroids.copy())

    n_iter = config.iters_per_epoch or math.ceil(state.store.count / (config.batch_identities * config.batch_instances))
    params = state.store.params
    losses = []
    for _ in range(n_iter):
        idx = pk_sample(assign, config.batch_identities, config.batch_instances, state.rng)
        targets = assign.labels[idx]
        f = params[idx] / np.linalg.norm(params[idx], axis=1, keepdims=True)
        if config.use_cgl:
            P = confidence_matrix(distance_matrix(f, bank))
            labels = confidence_guided_labels(targets, P, config.beta).labels
        else:
            labels = one_hot(targets, bank.num_clusters)
        loss, grads = batch_loss_and_grad(params[idx], bank, labels, config.temperature)
        np.add.at(params, idx, -state.learning_rate * grads)
        for j in np.argsort(idx, kind="stable"):
            bank.momentum_update(int(targets[j]), f[j])
        losses.append(loss)
    state.store.refresh()
    return EpochTrace(t, assign.num_clusters, assign.num_outliers, conf.mean(), losses, delta, False, assign, conf, snapshot)


def evaluate_epoch(features, trace: EpochTrace, dataset: Dataset, query, gallery, cfg: EvalConfig) -> EpochMetrics:
    truth = dataset.truth
    mAP = evaluation.mean_average_precision(features, query, gallery, truth, cfg.exclude_same_camera)
    cmc = evaluation.cmc_topk(features, query, gallery, truth, evaluation.CMC_KS, cfg.exclude_same_camera)
    if trace.degenerate:
        ics = {"vanilla": float("nan"), "cgc": float("nan")}
        hist = np.zeros(evaluation.HIST_BINS, dtype=np.int64)
    else:
        ics = evaluation.epoch_ics(trace.assignment, truth, trace.confidence, trace.delta_used, cfg)
        hist = evaluation.silhouette_histogram(trace.confidence)
    return EpochMetrics(trace.epoch, mAP, cmc, ics["vanilla"], ics["cgc"], hist)


def train(dataset: Dataset, config: TrainConfig, evaluate: bool = True):
    """Run every epoch; return ``(final FeatureStore, traces, MetricsTimeline)``.

    The learning rate is divided by 10 at the start of each epoch listed in
    ``config.lr_decay_epochs``.
    """
    config.validate()
    state = init_state(dataset.observations, config)
    traces, timeline = [], MetricsTimeline()
    if evaluate:
        query, gallery = split_query_gallery(dataset.truth, config.eval.query_fraction, config.seed)
    for t in range(config.epochs):
        if t in config.lr_decay_epochs:
            state.learning_rate /= 10.0
        trace = run_epoch(state, config, t)
        traces.append(trace)
        if evaluate:
            timeline.append(evaluate_epoch(state.store.features, trace, dataset, query, gallery, config.eval))
    return state.store, traces, timeline
