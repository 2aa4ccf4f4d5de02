import numpy as np
import pytest

from cgclab.clustering import DbscanParams, cluster_members, dbscan, demote_singletons
from cgclab.core import OUTLIER, ClusterAssignment, l2_normalize_rows
from cgclab.exceptions import ConfigError, EmptyInput

from oracles import dbscan_bruteforce


def on_circle(degrees):
    rad = np.deg2rad(degrees)
    return np.stack([np.cos(rad), np.sin(rad)], axis=1)


def as_sets(assign):
    return {frozenset(m) for m in cluster_members(assign)}, set(np.flatnonzero(assign.labels == OUTLIER).tolist())


def random_instance(rng, n, d=3):
    centers = l2_normalize_rows(rng.standard_normal((rng.integers(1, 4), d)))
    pts = centers[rng.integers(0, len(centers), n)] + rng.normal(0, 0.35, (n, d))
    return l2_normalize_rows(pts)


def test_single_dense_blob():
    pts = on_circle([0, 5, 10])
    assign = dbscan(pts, DbscanParams(eps=0.1, min_pts=2))
    assert assign.num_clusters == 1
    assert assign.labels.tolist() == [0, 0, 0]


def test_no_density_all_outliers():
    pts = on_circle([0, 90, 180, 270])
    assign = dbscan(pts, DbscanParams(eps=0.5, min_pts=2))
    assert assign.num_clusters == 0
    assert np.all(assign.labels == OUTLIER)


def test_two_blobs_and_stragglers_match_oracle():
    degrees = [0, 5, 10, 15, 20, 120, 125, 130, 135, 140, 70, 250]
    pts = on_circle(degrees)
    assign = dbscan(pts, DbscanParams(eps=0.3, min_pts=3))
    expected = dbscan_bruteforce(pts.tolist(), 0.3, 3)
    assert as_sets(assign) == expected
    assert expected == ({frozenset(range(5)), frozenset(range(5, 10))}, {10, 11})


def test_border_point_goes_to_first_cluster():
    # sample 8 (30 deg) is within eps of both blobs but has only 3 neighbours
    pts = on_circle([0, 2, 4, 6, 54, 56, 58, 60, 30])
    params = DbscanParams(eps=1 - np.cos(np.deg2rad(25)), min_pts=4)
    assign = dbscan(pts, params)
    assert assign.labels.tolist() == [0, 0, 0, 0, 1, 1, 1, 1, 0]
    assert as_sets(assign) == dbscan_bruteforce(pts.tolist(), params.eps, 4)


def test_relabel_by_smallest_member():
    # sample 0 is a border point of the blob seeded later by core sample 1's neighbours
    pts = on_circle([100, 0, 2, 4, 96, 98, 102])
    assign = dbscan(pts, DbscanParams(eps=0.01, min_pts=3))
    firsts = [min(m) for m in cluster_members(assign)]
    assert firsts == sorted(firsts)


@pytest.mark.parametrize("seed", range(20))
def test_agrees_with_bruteforce(seed):
    rng = np.random.default_rng(seed)
    pts = random_instance(rng, int(rng.integers(5, 41)))
    params = DbscanParams(eps=float(rng.uniform(0.05, 0.4)), min_pts=int(rng.integers(2, 6)))
    assert as_sets(dbscan(pts, params)) == dbscan_bruteforce(pts.tolist(), params.eps, params.min_pts)


@pytest.mark.parametrize("seed", range(10))
def test_permutation_equivariance(seed):
    rng = np.random.default_rng(100 + seed)
    pts = random_instance(rng, int(rng.integers(5, 51)))
    # min_pts=2 has no border ambiguity, so the partition is order-free
    params = DbscanParams(eps=0.15, min_pts=2)
    perm = rng.permutation(len(pts))
    base = as_sets(dbscan(pts, params))
    permuted = dbscan(pts[perm], params)
    mapped = {frozenset(int(perm[i]) for i in c) for c in as_sets(permuted)[0]}
    assert mapped == base[0]


def test_raising_eps_never_adds_outliers(rng):
    pts = random_instance(rng, 40)
    counts = [dbscan(pts, DbscanParams(eps=e, min_pts=4)).num_outliers for e in np.linspace(0.02, 0.6, 15)]
    assert all(b <= a for a, b in zip(counts, counts[1:]))


def test_params_validated():
    with pytest.raises(ConfigError):
        DbscanParams(eps=2.5)
    with pytest.raises(ConfigError):
        DbscanParams(min_pts=1)
    with pytest.raises(EmptyInput):
        dbscan(np.zeros((0, 3)))


def test_cluster_members_examples():
    assert cluster_members(ClusterAssignment([0, OUTLIER, 0], 1)) == [[0, 2]]
    assert cluster_members(ClusterAssignment([0, 1, 0, 1], 2)) == [[0, 2], [1, 3]]
    labels = [2, OUTLIER, 0, 1, 1, 0, 2, OUTLIER]
    assign = ClusterAssignment(labels, 3)
    flat = sorted(sum(cluster_members(assign), []) + [i for i, l in enumerate(labels) if l == OUTLIER])
    assert flat == list(range(len(labels)))


def test_demote_singletons():
    assign = demote_singletons(ClusterAssignment([0, 1, 0, 2, 2, OUTLIER], 3))
    assert assign.labels.tolist() == [0, OUTLIER, 0, 1, 1, OUTLIER]
    assert assign.num_clusters == 2
    assert np.all(assign.sizes() >= 2)
