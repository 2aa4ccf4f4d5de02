"""Run directories, sweeps and comparison reports.

A run directory holds everything one training run produced::

    manifest.json    run id, config snapshot, dataset fingerprint, file list
    trace.csv        epoch, C, outliers, mean_silhouette, delta, mean_loss, mAP, top1
    metrics.csv      epoch, mAP, top1, top5, top10, ics_vanilla, ics_cgc
    histograms.csv   epoch, bin, lo, hi, count  (silhouette distribution)
    scores.csv       epoch, sample_id, cluster_id, silhouette
    bank.csv         epoch, cluster_id, member_count, filtered_count, c_0..
    pca.csv          sample_id, identity, x, y  (final features)
    summary.json     final metrics

Reports read these files only; nothing is retrained.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from pathlib import Path

import numpy as np

from . import __version__
from .centroids import CONSTANT, DYNAMIC, LINEAR, ThresholdSchedule, write_bank_csv
from .confidence import write_scores_csv
from .datagen import Dataset
from .evaluation import HIST_BINS, write_pca_csv
from .exceptions import CgcLabError
from .trainer import TrainConfig, train

# choices the method description leaves open; copied into every manifest
ASSUMPTIONS = {
    "dbscan": "cosine distance; eps and min_pts chosen here, not taken from the method description",
    "bank_renormalized": "centroids re-normalized after construction and after each momentum update",
    "soft_labels_bank": "soft labels computed per batch against the live, momentum-updated bank",
    "temperature_in_soft_loss": "temperature applied to logits in the soft-label loss",
    "ics_average": "ICS averaged over boundary samples unless eval.ics_average is 'members'",
}

OUTPUTS = ("trace.csv", "metrics.csv", "histograms.csv", "scores.csv", "bank.csv", "pca.csv", "summary.json")


class IncompatibleRuns(CgcLabError):
    """Runs being compared were trained on different datasets."""


def _num(x) -> str:
    x = float(x)
    return "nan" if np.isnan(x) else repr(x)


def desk_scale_config(seed: int = 0, **overrides) -> TrainConfig:
    """Training config used for the synthetic ablations.

    The library defaults (lr 0.05, τ 0.05) barely move a free embedding
    table in 15 epochs. A larger step and a softer temperature make the
    features actually change, so ablations have something to compare.
    """
    cfg = dataclasses.replace(TrainConfig(), seed=seed, learning_rate=1.0, temperature=0.3)
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def delta_strategies(delta0_linear=0.2, epsilon=-0.1, delta0_dynamic=0.1, constants=(-0.1, 0.0, 0.1)):
    """The five threshold strategies compared in the δ sweep."""
    out = [
        ThresholdSchedule(LINEAR, delta0=delta0_linear, epsilon=epsilon),
        ThresholdSchedule(DYNAMIC, delta0=delta0_dynamic),
    ]
    out += [ThresholdSchedule(CONSTANT, constant_value=c) for c in constants]
    return out


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_run(dataset: Dataset, config: TrainConfig, out_dir, run_id: str, fingerprint: str, extra=None):
    """Train ``config`` on ``dataset`` and write every artifact into ``out_dir``.

    Returns ``(run_dir, traces, timeline)``.
    """
    run_dir = Path(out_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    store, traces, timeline = train(dataset, config)

    _write_rows(
        run_dir / "trace.csv",
        ["epoch", "C", "outliers", "mean_silhouette", "delta", "mean_loss", "mAP", "top1"],
        [
            [t.epoch, t.num_clusters, t.num_outliers, _num(t.mean_silhouette), _num(t.delta_used),
             _num(t.mean_loss), _num(m.mAP), _num(m.cmc[1])]
            for t, m in zip(traces, timeline)
        ],
    )
    _write_rows(
        run_dir / "metrics.csv",
        ["epoch", "mAP", "top1", "top5", "top10", "ics_vanilla", "ics_cgc"],
        [
            [m.epoch, _num(m.mAP), _num(m.cmc[1]), _num(m.cmc[5]), _num(m.cmc[10]),
             _num(m.ics_vanilla), _num(m.ics_cgc)]
            for m in timeline
        ],
    )
    edges = np.linspace(-1.0, 1.0, HIST_BINS + 1)
    _write_rows(
        run_dir / "histograms.csv",
        ["epoch", "bin", "lo", "hi", "count"],
        [
            [m.epoch, b, _num(edges[b]), _num(edges[b + 1]), int(m.silhouette_histogram[b])]
            for m in timeline
            for b in range(HIST_BINS)
        ],
    )
    write_scores_csv(
        run_dir / "scores.csv", [(t.epoch, t.assignment, t.confidence) for t in traces if not t.degenerate]
    )
    write_bank_csv(run_dir / "bank.csv", [(t.epoch, t.bank) for t in traces if t.bank is not None])
    write_pca_csv(run_dir / "pca.csv", store.features, dataset.truth)

    final = timeline.final
    degenerate = sum(t.degenerate for t in traces)
    summary = {
        "run_id": run_id,
        "epochs": len(traces),
        "degenerate_epochs": degenerate,
        "final": None
        if final is None
        else {
            "mAP": final.mAP,
            "top1": final.cmc[1],
            "top5": final.cmc[5],
            "top10": final.cmc[10],
            "ics_vanilla": _nan_to_none(final.ics_vanilla),
            "ics_cgc": _nan_to_none(final.ics_cgc),
            "mean_silhouette": _nan_to_none(traces[-1].mean_silhouette),
            "num_clusters": traces[-1].num_clusters,
        },
    }
    (run_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    manifest = {
        "run_id": run_id,
        "software_version": __version__,
        "dataset_fingerprint": fingerprint,
        "config": config.to_dict(),
        "ablation": ablation_name(config),
        "strategy": config.schedule.label(),
        "outputs": list(OUTPUTS),
        "assumptions": ASSUMPTIONS,
        **(extra or {}),
    }
    (run_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return run_dir, traces, timeline


def _nan_to_none(x):
    return None if x is None or np.isnan(x) else float(x)


def ablation_name(config: TrainConfig) -> str:
    return {(False, False): "baseline", (True, False): "cgc", (False, True): "cgl", (True, True): "full"}[
        (config.use_cgc, config.use_cgl)
    ]


def load_run(run_dir):
    run_dir = Path(run_dir)
    manifest = json.loads((run_dir / "manifest.json").read_text())
    return {
        "dir": run_dir,
        "manifest": manifest,
        "summary": json.loads((run_dir / "summary.json").read_text()),
        "metrics": _read_rows(run_dir / "metrics.csv"),
        "histograms": _read_rows(run_dir / "histograms.csv"),
    }


def report(run_dirs, out_dir):
    """Merge run directories into comparison tables; return the written paths.

    Raises
    ------
    IncompatibleRuns
        If the runs were trained on datasets with different fingerprints.
    """
    runs = [load_run(d) for d in run_dirs]
    if not runs:
        raise ValueError("report needs at least one run directory")
    prints = {r["manifest"]["dataset_fingerprint"] for r in runs}
    if len(prints) > 1:
        raise IncompatibleRuns(f"runs use {len(prints)} different datasets")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def final(r, key):
        f = r["summary"]["final"]
        return _num(f[key]) if f and f.get(key) is not None else "nan"

    paths = {}
    paths["ablation"] = out / "ablation.csv"
    _write_rows(
        paths["ablation"],
        ["run_id", "ablation", "beta", "mAP", "top1", "top5", "top10", "mean_silhouette"],
        [
            [r["manifest"]["run_id"], r["manifest"]["ablation"], _num(r["manifest"]["config"]["beta"]),
             final(r, "mAP"), final(r, "top1"), final(r, "top5"), final(r, "top10"), final(r, "mean_silhouette")]
            for r in runs
        ],
    )
    paths["delta_strategies"] = out / "delta_strategies.csv"
    _write_rows(
        paths["delta_strategies"],
        ["run_id", "strategy", "delta", "mAP", "top1"],
        [
            [r["manifest"]["run_id"], r["manifest"]["config"]["schedule"]["kind"], _delta_column(r["manifest"]),
             final(r, "mAP"), final(r, "top1")]
            for r in runs
            if r["manifest"]["config"]["use_cgc"]
        ],
    )
    paths["ics_timeline"] = out / "ics_timeline.csv"
    _write_rows(
        paths["ics_timeline"],
        ["run_id", "epoch", "ics_vanilla", "ics_cgc"],
        [[r["manifest"]["run_id"], m["epoch"], m["ics_vanilla"], m["ics_cgc"]] for r in runs for m in r["metrics"]],
    )
    paths["histograms"] = out / "histograms.csv"
    _write_rows(
        paths["histograms"],
        ["run_id", "epoch", "bin", "lo", "hi", "count"],
        [[r["manifest"]["run_id"], h["epoch"], h["bin"], h["lo"], h["hi"], h["count"]] for r in runs for h in r["histograms"]],
    )
    return paths


def _delta_column(manifest) -> str:
    sched = manifest["config"]["schedule"]
    if sched["kind"] == CONSTANT:
        return _num(sched["constant_value"])
    if sched["kind"] == LINEAR:
        return f"{sched['delta0']:g}*t/T{sched['epsilon']:+g}"
    return f"{sched['delta0']:g}*tanh(0.1*(t-T/2))"


def sweep_configs(base: TrainConfig, *, betas=None, strategies=None):
    """``(run_id, config, extra)`` triples for a β sweep or a δ-strategy sweep."""
    if betas is not None:
        return [(f"beta-{b:g}", dataclasses.replace(base, beta=float(b)), {"sweep": "beta"}) for b in betas]
    if strategies is not None:
        out = []
        for sched in strategies:
            run_id = "delta-" + sched.label().replace("(", "-").rstrip(")")
            out.append((run_id, dataclasses.replace(base, schedule=sched, use_cgc=True), {"sweep": "delta"}))
        return out
    raise ValueError("give betas or strategies")
