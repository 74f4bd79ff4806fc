import numpy as np
import pytest

from mtsm import geometry as geo
from mtsm.clustering import (AnchorSelectionConfig, coverage_stat_d_star,
                             ddiam, gromov_upper_bound, initial_anchor_count,
                             riemannian_kmeans, select_anchors)


def _two_blobs(seed=0, spread=0.15, n=8):
    man = geo.sphere(2)
    c1 = geo.Point(man, np.array([1.0, 0.0, 0.0]))
    c2 = geo.Point(man, np.array([0.0, 0.0, 1.0]))
    pts = []
    for i in range(n):
        pts.append(geo.exp_map(c1, geo.random_tangent(c1, spread, seed + i)))
        pts.append(geo.exp_map(c2, geo.random_tangent(c2, spread,
                                                      seed + 100 + i)))
    return man, c1, c2, pts


def test_ddiam_two_points():
    man = geo.sphere(2)
    p = geo.Point(man, np.array([1.0, 0.0, 0.0]))
    q = geo.Point(man, np.array([0.0, 1.0, 0.0]))
    assert abs(ddiam([p, q]) - np.pi / 2) <= 1e-14


def test_coverage_stat_inf_beyond_injectivity():
    man = geo.sphere(2)
    p = geo.Point(man, np.array([1.0, 0.0, 0.0]))
    anti = geo.Point(man, np.array([-1.0, 0.0, 0.0]))
    assert coverage_stat_d_star([p, anti], [p]) == np.inf
    near = geo.exp_map(p, geo.random_tangent(p, 0.3, 0))
    assert abs(coverage_stat_d_star([p, near], [p]) - 0.3) <= 1e-10


def test_initial_anchor_count():
    assert initial_anchor_count(10.0, 0.0, 0.0) == 1
    assert initial_anchor_count(10.0, 2.0, 0.0) == 2  # floor(0.5*10/2)
    # curvature term: floor(0.5 * 10 * sqrt(4)/pi) = 3
    assert initial_anchor_count(10.0, 0.0, -4.0) == 3
    assert initial_anchor_count(0.1, 2.0, 0.0) == 1  # never below one


def test_kmeans_recovers_separated_blobs():
    man, c1, c2, pts = _two_blobs()
    cfg = AnchorSelectionConfig(R_max=2, M=0.0, L=0.0, rng_seed=0)
    clus = riemannian_kmeans(pts, 2, cfg)
    assert len(clus.centers) == 2
    # each center sits inside one blob and the assignment separates them
    d_to_true = [[geo.dist(c, t) for t in (c1, c2)] for c in clus.centers]
    labels = [int(np.argmin(row)) for row in d_to_true]
    assert sorted(labels) == [0, 1]
    assert all(min(row) < 0.2 for row in d_to_true)
    blob_of = [i % 2 for i in range(len(pts))]
    for j in range(2):
        members = clus.cluster_indices(j)
        assert len(set(blob_of[i] for i in members)) == 1
    # radii bound the member distances
    for j in range(2):
        for i in clus.cluster_indices(j):
            assert geo.dist(clus.centers[j], pts[i]) <= clus.radii[j] + 1e-12


def test_kmeans_deterministic_for_fixed_seed():
    man, _, _, pts = _two_blobs(seed=3)
    cfg = AnchorSelectionConfig(R_max=2, M=0.0, L=0.0, rng_seed=7)
    a = riemannian_kmeans(pts, 2, cfg)
    b = riemannian_kmeans(pts, 2, cfg)
    for ca, cb in zip(a.centers, b.centers):
        assert np.array_equal(ca.coords, cb.coords)
    assert np.array_equal(a.assignment, b.assignment)


def test_select_anchors_on_blobs():
    man, _, _, pts = _two_blobs()
    cfg = AnchorSelectionConfig(R_max=4, M=0.0, L=-4.0, rng_seed=0)
    clus = select_anchors(pts, cfg)
    assert clus is not None
    assert clus.d_star < np.pi / 2.0


def test_select_anchors_returns_none_when_no_covering_exists():
    # six points at +-e_i on the unit sphere: any 2-partition has a cluster
    # of three points whose best center is at least arccos(1/sqrt(3)) ~ 0.955
    # from some member, above the pi/4 covering threshold for L = -16
    man = geo.sphere(2)
    rng = np.random.default_rng(0)
    pts = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = 1.0
        for s in (1.0, -1.0):
            v = s * e + 0.01 * rng.normal(size=3)  # break exact antipodes
            pts.append(geo.Point(man, v / np.linalg.norm(v)))
    cfg = AnchorSelectionConfig(R_max=2, M=0.0, L=-16.0, rng_seed=0)
    assert select_anchors(pts, cfg) is None


def test_select_anchors_requires_fewer_anchors_than_samples():
    man, _, _, pts = _two_blobs()
    cfg = AnchorSelectionConfig(R_max=len(pts), M=0.0, L=0.0, rng_seed=0)
    with pytest.raises(ValueError):
        select_anchors(pts, cfg)


def test_gromov_bound_monotone_in_radius():
    vals = [gromov_upper_bound(3, -1.0, R, 0.5) for R in (1.0, 1.5, 2.0)]
    assert vals[0] < vals[1] < vals[2]
    # flat case equals the Euclidean volume ratio
    assert abs(gromov_upper_bound(3, 0.0, 1.0, 0.5) - 8.0) <= 1e-10
