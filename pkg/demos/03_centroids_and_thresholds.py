"""Centroids from all members vs only confident members, and the δ schedules that set the cut."""

import numpy as np

from cgclab import DatasetSpec, generate
from cgclab.centroids import ThresholdSchedule, confidence_guided_centroids, threshold_at, vanilla_centroids
from cgclab.clustering import DbscanParams, demote_singletons, dbscan
from cgclab.confidence import silhouette_scores

T = 15
for sched in (ThresholdSchedule("linear", delta0=0.2, epsilon=-0.1),
              ThresholdSchedule("dynamic", delta0=0.1),
              ThresholdSchedule("constant", constant_value=0.0)):
    values = [threshold_at(sched.with_total(T), t) for t in range(T + 1)]
    print(f"{sched.label():>14}: " + " ".join(f"{v:+.2f}" for v in values[::3]))

ds = generate(DatasetSpec(seed=2, boundary_fraction=0.3))
assign = demote_singletons(dbscan(ds.observations, DbscanParams()))
conf = silhouette_scores(assign, ds.observations)

plain = vanilla_centroids(assign, ds.observations)
for delta in (-1.0, 0.0, 0.2, 0.4):
    guided = confidence_guided_centroids(assign, ds.observations, conf, delta)
    passing = np.array([np.sum(conf.scores[assign.labels == c] > delta) for c in range(assign.num_clusters)])
    shift = np.degrees(np.arccos(np.clip(np.sum(plain.centroids * guided.centroids, axis=1), -1, 1)))
    print(f"delta {delta:+.1f}: {passing.sum() / assign.labels.size:.0%} of samples pass, "
          f"{np.sum(passing == 0)} clusters fall back to all members, centroids moved {shift.mean():.2f} deg")

# momentum keeps a running direction and stays on the sphere
bank = vanilla_centroids(assign, ds.observations, momentum=0.2)
bank.momentum_update(0, ds.observations[assign.labels == 0][0])
print("bank row norm after update:", round(float(np.linalg.norm(bank.centroids[0])), 12))
