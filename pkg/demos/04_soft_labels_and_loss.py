"""Soft pseudo labels from sample-to-centroid distances, and the loss and gradient they drive."""

import numpy as np

from cgclab.core import l2_normalize_rows
from cgclab.labeling import confidence_guided_labels, confidence_matrix, distance_matrix, one_hot
from cgclab.objective import batch_loss_and_grad, cluster_nce_loss, soft_ce_loss

rng = np.random.default_rng(0)
bank = l2_normalize_rows(rng.standard_normal((4, 8)))
feats = l2_normalize_rows(bank[[0, 0, 1, 2]] + 0.3 * rng.standard_normal((4, 8)))
ids = np.array([0, 0, 1, 2])

P = confidence_matrix(distance_matrix(feats, bank))
np.set_printoptions(precision=3, suppress=True)
print("P (normalized sigmoid of negative distances):\n", P)

for beta in (1.0, 0.8, 0.0):
    y = confidence_guided_labels(ids, P, beta).labels
    print(f"beta {beta}: label row 0 = {y[0]}")

# with one-hot labels the soft loss is the plain cluster contrast loss
tau = 0.05
print("one-hot soft loss", soft_ce_loss(feats[0], bank, one_hot([0], 4)[0], tau),
      "== nce loss", cluster_nce_loss(feats[0], bank, 0, tau))

# gradient on the raw parameters; it is orthogonal to the feature direction
params = feats * 2.0
loss, grad = batch_loss_and_grad(params, bank, confidence_guided_labels(ids, P, 0.8).labels, tau)
print(f"batch loss {loss:.4f}, radial component of gradient {np.abs(np.sum(grad * feats, axis=1)).max():.1e}")
