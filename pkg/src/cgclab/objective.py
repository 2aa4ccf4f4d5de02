"""Contrastive objectives against the centroid bank and their gradients.

The bank is treated as a constant: gradients flow only into the sample
parameters, through the L2 normalization ``f = p / ||p||``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import log_softmax

from .exceptions import ConfigError, LabelError, ZeroVector


@dataclass(frozen=True)
class LossConfig:
    temperature: float = 0.05
    beta: float = 0.8

    def __post_init__(self):
        if not self.temperature > 0:
            raise ConfigError("temperature must be > 0")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError("beta must lie in [0, 1]")


def _centroids(bank):
    return np.asarray(getattr(bank, "centroids", bank), dtype=np.float64)


def cluster_nce_loss(f, bank, target: int, tau: float) -> float:
    cents = _centroids(bank)
    if not 0 <= target < cents.shape[0]:
        raise IndexError(f"target {target} out of range for {cents.shape[0]} centroids")
    logp = log_softmax(cents @ np.asarray(f, dtype=np.float64) / tau)
    return float(-logp[target])


def soft_ce_loss(f, bank, label_row, tau: float) -> float:
    label_row = np.asarray(label_row, dtype=np.float64)
    if abs(label_row.sum() - 1.0) > 1e-6 or np.any(label_row < 0):
        raise LabelError("label row is not a probability vector")
    logp = log_softmax(_centroids(bank) @ np.asarray(f, dtype=np.float64) / tau)
    return float(-np.sum(label_row * logp))


def batch_loss_and_grad(params_batch, bank, soft_labels, tau: float):
    """Mean soft cross-entropy over the batch and its gradient w.r.t. the raw params.

    Returns
    -------
    loss : float
    grads : ndarray, shape (B, d)
    """
    params_batch = np.atleast_2d(np.asarray(params_batch, dtype=np.float64))
    soft_labels = np.atleast_2d(np.asarray(soft_labels, dtype=np.float64))
    cents = _centroids(bank)
    norms = np.linalg.norm(params_batch, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise ZeroVector("zero parameter row in batch", row=int(zero[0]))
    b = params_batch.shape[0]
    f = params_batch / norms[:, None]

    logp = log_softmax(f @ cents.T / tau, axis=1)
    per_sample = -np.sum(soft_labels * logp, axis=1)
    loss = float(per_sample.sum() / b)

    # d(loss)/d(logits) = (softmax - y) / B, logits = f M^T / tau
    dlogits = (np.exp(logp) * soft_labels.sum(axis=1, keepdims=True) - soft_labels) / b
    grad_f = dlogits @ cents / tau
    radial = np.sum(grad_f * f, axis=1, keepdims=True)
    grads = (grad_f - radial * f) / norms[:, None]
    return loss, grads
