import dataclasses
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cgclab.centroids import ThresholdSchedule
from cgclab.clustering import DbscanParams
from cgclab.core import OUTLIER, ClusterAssignment, GroundTruth
from cgclab.datagen import Dataset, DatasetSpec, generate
from cgclab.exceptions import ConfigError
from cgclab.trainer import ABLATIONS, TrainConfig, init_state, pk_sample, run_epoch, train


def small_dataset(seed=0, **kw):
    base = dict(num_identities=6, samples_per_identity=12, dim=16, noise_sigma=0.25, seed=seed)
    base.update(kw)
    return generate(DatasetSpec(**base))


def quick(seed=0, **kw):
    base = dict(epochs=3, seed=seed, learning_rate=0.5, temperature=0.3)
    base.update(kw)
    return TrainConfig(**base)


@settings(max_examples=50, deadline=None)
@given(
    sizes=st.lists(st.integers(1, 9), min_size=1, max_size=6),
    P=st.integers(1, 8),
    K=st.integers(1, 6),
    seed=st.integers(0, 2**16),
)
def test_pk_sample_shape_and_membership(sizes, P, K, seed):
    labels = np.concatenate([[c] * n for c, n in enumerate(sizes)] + [[OUTLIER] * 2])
    assign = ClusterAssignment(labels, len(sizes))
    idx = pk_sample(assign, P, K, np.random.default_rng(seed))
    clusters = labels[idx]
    assert idx.size == min(P, len(sizes)) * K
    assert (clusters != OUTLIER).all()
    picked, counts = np.unique(clusters, return_counts=True)
    assert picked.size == min(P, len(sizes))
    assert (counts == K).all()
    for c in picked:
        chunk = idx[clusters == c]
        if sizes[c] >= K:
            assert np.unique(chunk).size == K


def test_determinism_bit_identical():
    ds = small_dataset()
    a = train(ds, quick())
    b = train(ds, quick())
    np.testing.assert_array_equal(a[0].params, b[0].params)
    assert [t.loss_curve for t in a[1]] == [t.loss_curve for t in b[1]]
    assert [m.mAP for m in a[2]] == [m.mAP for m in b[2]]


def test_zero_epochs_returns_initial_features():
    ds = small_dataset()
    store, traces, timeline = train(ds, quick(epochs=0))
    np.testing.assert_array_equal(store.params, ds.observations)
    np.testing.assert_allclose(store.features, ds.observations, rtol=0, atol=1e-15)
    assert traces == [] and len(timeline.records) == 0


def test_beta_one_matches_one_hot_bit_for_bit():
    ds = small_dataset(seed=2)
    soft = train(ds, quick(use_cgc=False, use_cgl=True, beta=1.0), evaluate=False)
    hard = train(ds, quick(use_cgc=False, use_cgl=False), evaluate=False)
    np.testing.assert_array_equal(soft[0].params, hard[0].params)


def test_ground_truth_never_steers_training():
    ds = small_dataset(seed=4)
    rng = np.random.default_rng(0)
    scrambled = Dataset(
        ds.observations,
        GroundTruth(rng.permutation(ds.truth.identities), rng.permutation(ds.truth.camera_ids)),
        ds.spec,
        ds.boundary_mask,
    )
    a = train(ds, quick(), evaluate=True)
    b = train(scrambled, quick(), evaluate=True)
    np.testing.assert_array_equal(a[0].params, b[0].params)
    assert [t.loss_curve for t in a[1]] == [t.loss_curve for t in b[1]]


@pytest.mark.parametrize("seed", range(5))
def test_loss_descends_on_zero_noise(seed):
    ds = small_dataset(seed=seed, noise_sigma=0.0, boundary_fraction=0.0, camera_bias_sigma=0.0)
    config = quick(seed=seed, epochs=1, iters_per_epoch=30, learning_rate=0.05, temperature=0.05)
    trace = run_epoch(init_state(ds.observations, config), config, 0)
    assert trace.loss_curve[-1] < trace.loss_curve[0]


def test_trace_fields():
    ds = small_dataset()
    cfg = quick(iters_per_epoch=4)
    _, traces, timeline = train(ds, cfg)
    assert [t.epoch for t in traces] == [0, 1, 2]
    for t in traces:
        assert len(t.loss_curve) == 4
        assert t.num_clusters + 0 == t.assignment.num_clusters
        np.testing.assert_allclose(np.linalg.norm(t.bank.centroids, axis=1), 1.0, atol=1e-9)
    assert [t.delta_used for t in traces] == [-0.1, 0.2 / 3 - 0.1, 0.4 / 3 - 0.1]
    for m in timeline.records:
        assert 0.0 <= m.mAP <= 1.0
        assert m.silhouette_histogram.sum() == traces[m.epoch].confidence.valid_mask.sum()


def test_default_iterations_cover_dataset_once():
    ds = small_dataset()
    _, traces, _ = train(ds, quick(epochs=1, batch_identities=4, batch_instances=4), evaluate=False)
    assert len(traces[0].loss_curve) == int(np.ceil(72 / 16))


def test_degenerate_epoch_when_nothing_clusters():
    ds = small_dataset()
    cfg = quick(epochs=2, dbscan=DbscanParams(eps=1e-6, min_pts=4))
    store, traces, timeline = train(ds, cfg)
    assert all(t.degenerate for t in traces)
    assert all(np.isnan(t.mean_loss) for t in traces)
    np.testing.assert_array_equal(store.params, ds.observations)
    assert np.isnan(timeline.final.ics_vanilla)


def test_lr_decay_applied():
    ds = small_dataset()
    plain = train(ds, quick(epochs=2), evaluate=False)[0].params
    decayed = train(ds, quick(epochs=2, lr_decay_epochs=(0,)), evaluate=False)[0].params
    slow = train(ds, quick(epochs=2, learning_rate=0.05), evaluate=False)[0].params
    np.testing.assert_array_equal(decayed, slow)
    assert not np.array_equal(plain, decayed)


@pytest.mark.parametrize("name", sorted(ABLATIONS))
def test_ablation_flags(name):
    cfg = TrainConfig().with_ablation(name)
    assert (cfg.use_cgc, cfg.use_cgl) == ABLATIONS[name]


def test_config_json_round_trip():
    cfg = TrainConfig(epochs=4, lr_decay_epochs=(2, 3), schedule=ThresholdSchedule("constant", constant_value=0.1),
                      dbscan=DbscanParams(eps=0.3, min_pts=3), seed=9)
    again = TrainConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg


@pytest.mark.parametrize(
    "data",
    [
        {"bogus": 1},
        {"dbscan": {"eps": 0.5, "radius": 2}},
        {"epochs": -1},
        {"beta": 1.5},
        {"temperature": 0.0},
        {"intra_denominator": "other"},
        {"schedule": {"kind": "cosine"}},
        {"batch_instances": 0},
    ],
)
def test_config_rejects_invalid(data):
    with pytest.raises(ConfigError):
        TrainConfig.from_dict(data)


def test_unknown_ablation():
    with pytest.raises(ConfigError):
        TrainConfig().with_ablation("everything")

