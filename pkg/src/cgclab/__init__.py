"""Confidence-guided centroids and soft pseudo labels for clustering-based
unsupervised representation learning, on synthetic identity data."""

from .centroids import (
    CentroidBank,
    ThresholdSchedule,
    confidence_guided_centroids,
    momentum_update,
    threshold_at,
    vanilla_centroids,
)
from .clustering import DbscanParams, cluster_members, dbscan, demote_singletons
from .confidence import ConfidenceReport, intra_distance, nearest_other_distance, silhouette_scores
from .core import (
    OUTLIER,
    ClusterAssignment,
    FeatureStore,
    GroundTruth,
    cosine_distance,
    cosine_similarity,
    l2_normalize_rows,
)
from .datagen import Dataset, DatasetSpec, generate, load_dataset, save_dataset, split_query_gallery
from .evaluation import EvalConfig, MetricsTimeline, cmc_topk, identity_consistency_score, mean_average_precision
from .labeling import SoftLabelMatrix, confidence_guided_labels, confidence_matrix, distance_matrix
from .objective import LossConfig, batch_loss_and_grad, cluster_nce_loss, soft_ce_loss
from .trainer import EpochTrace, TrainConfig, pk_sample, run_epoch, train

__version__ = "0.1.0"
