"""Retrieval metrics, the identity consistency score over training, and a 2-D projection."""

import numpy as np

from cgclab import DatasetSpec, generate
from cgclab.evaluation import mean_average_precision, cmc_topk, pca_2d
from cgclab.datagen import split_query_gallery
from cgclab.experiments import desk_scale_config
from cgclab.trainer import train

ds = generate(DatasetSpec(seed=3))
query, gallery = split_query_gallery(ds.truth, 0.2, seed=3)
print(f"raw features: mAP {mean_average_precision(ds.observations, query, gallery, ds.truth):.4f}, "
      f"CMC {cmc_topk(ds.observations, query, gallery, ds.truth, (1, 5, 10))}")

store, traces, timeline = train(ds, desk_scale_config(3, epochs=8))
print("epoch  mAP     ICS vanilla  ICS cgc  delta")
for m, t in zip(timeline.records, traces):
    print(f"{m.epoch:>5}  {m.mAP:.4f}  {m.ics_vanilla:11.3f}  {m.ics_cgc:7.3f}  {t.delta_used:+.3f}")

hist = timeline.final.silhouette_histogram
edges = np.linspace(-1, 1, hist.size + 1)
top = np.argsort(hist)[-3:][::-1]
print("fullest silhouette bins:", ", ".join(f"[{edges[b]:+.2f},{edges[b + 1]:+.2f}) n={hist[b]}" for b in top))

xy = pca_2d(store.features)
print("PCA coordinates shape", xy.shape, "first row", np.round(xy[0], 3))
