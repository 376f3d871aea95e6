import numpy as np
import pytest

from gmaplatent.cloud import LabeledPointCloud
from gmaplatent.errors import EmptyClass, UnmappedLabel
from gmaplatent.layout import (LayoutTransform, adjacency_isomorphic,
                               grid_layout, remove_outliers,
                               separate_clusters, separation_violations,
                               summarize_clusters)
from gmaplatent.mesh import delaunay_triangulate, extract_regions_and_graph
from gmaplatent.synthetic import gaussian_clusters


def _cloud(points, labels, class_count=None):
    points = np.asarray(points, dtype=float)
    labels = np.asarray(labels)
    if class_count is None:
        class_count = int(labels.max()) + 1
    return LabeledPointCloud(np.arange(len(points)), points, labels, class_count)


def test_singleton_summary():
    s = summarize_clusters(_cloud([(2.0, 3.0)], [0]))
    assert np.allclose(s[0].barycenter, (2, 3)) and s[0].radius == 0.0


def test_two_point_summary():
    s = summarize_clusters(_cloud([(0, 0), (2, 0)], [0, 0]))
    assert np.allclose(s[0].barycenter, (1, 0)) and np.isclose(s[0].radius, 1.0)


def test_unit_disk_summary():
    rng = np.random.default_rng(10)
    r = np.sqrt(rng.random(4000))
    t = 2 * np.pi * rng.random(4000)
    pts = np.column_stack([r * np.cos(t), r * np.sin(t)])
    s = summarize_clusters(_cloud(pts, np.zeros(4000, dtype=int)))[0]
    eps = 3.0 / np.sqrt(4000)
    assert np.linalg.norm(s.barycenter) < eps
    assert s.radius <= 1.0 + eps and s.radius > 0.95


def test_empty_class_raises():
    with pytest.raises(EmptyClass):
        summarize_clusters(_cloud([(0, 0)], [0], class_count=2))


def test_separate_already_ok_is_identity():
    cloud = _cloud([(0, 0), (0.1, 0), (10, 0), (10.1, 0)], [0, 0, 1, 1])
    out, transform = separate_clusters(cloud)
    assert np.allclose(out.positions, cloud.positions)
    for v in transform.translations.values():
        assert np.allclose(v, 0)


def test_separate_paper_update_rule():
    # two clusters with barycenters (0,0) and (1,0), radii 1 each: the
    # second moves to (2,0)
    pts = [(-1, 0), (1, 0), (0, 0), (2, 0)]
    cloud = _cloud(pts, [0, 0, 1, 1])
    out, _ = separate_clusters(cloud)
    s = summarize_clusters(out)
    assert np.allclose(s[0].barycenter, (0, 0))
    assert np.allclose(s[1].barycenter, (2, 0))


def test_separate_random_all_pairs_ok():
    cloud = gaussian_clusters(np.zeros((6, 2)), 1.0, 60, seed=2)
    out, transform = separate_clusters(cloud)
    assert separation_violations(summarize_clusters(out)) == []
    # translations preserve intra-cluster geometry
    for label in range(6):
        a = cloud.positions[cloud.labels == label]
        b = out.positions[out.labels == label]
        da = np.linalg.norm(a[1:] - a[:-1], axis=1)
        db = np.linalg.norm(b[1:] - b[:-1], axis=1)
        assert np.allclose(da, db, atol=1e-12)
    # the returned transform maps input to output
    again = transform.apply(cloud)
    assert np.allclose(again.positions, out.positions)


def test_grid_layout_single_cluster_at_origin():
    cloud = gaussian_clusters([[5.0, 7.0]], 0.5, 40, seed=1)
    out, _ = grid_layout(cloud)
    assert np.allclose(summarize_clusters(out)[0].barycenter, (0, 0), atol=1e-12)


def test_grid_layout_four_clusters_spacing():
    rng = np.random.default_rng(8)
    # radii all equal 1.5 exactly: place one point at distance 1.5
    pts = []
    labels = []
    for k, c in enumerate([(9, 9), (-4, 2), (3, -8), (0, 0)]):
        ring = np.array(c) + np.array([[1.5, 0], [-1.5, 0], [0, 1.5], [0, -1.5]])
        pts.extend(ring)
        labels.extend([k] * 4)
    out, _ = grid_layout(_cloud(pts, labels), columns=2)
    s = summarize_clusters(out)
    expected = [(0, 0), (3, 0), (0, -3), (3, -3)]
    for summary, target in zip(s, expected):
        assert np.allclose(summary.barycenter, target, atol=1e-9)


def test_grid_layout_ten_clusters_separated():
    cloud = gaussian_clusters(np.zeros((10, 2)), np.linspace(0.5, 2, 10), 50,
                              seed=3)
    out, _ = grid_layout(cloud)
    assert separation_violations(summarize_clusters(out)) == []


def test_grid_layout_idempotent():
    cloud = gaussian_clusters(np.zeros((5, 2)), 1.0, 50, seed=4)
    once, _ = grid_layout(cloud)
    twice, _ = grid_layout(once)
    a = [s.barycenter for s in summarize_clusters(once)]
    b = [s.barycenter for s in summarize_clusters(twice)]
    assert np.allclose(a, b, atol=1e-9)


def _graph_of(cloud):
    return extract_regions_and_graph(delaunay_triangulate(cloud)).graph


def test_adjacency_isomorphic_reflexive():
    xs, ys = np.meshgrid(np.linspace(0, 1, 8), np.linspace(0, 1, 8))
    pts = np.column_stack([xs.ravel(), ys.ravel()])
    g = _graph_of(_cloud(pts, (pts[:, 0] > 0.5).astype(int)))
    ok, report = adjacency_isomorphic(g, g, {0: 0, 1: 1})
    assert ok and report == []


def test_adjacency_vertical_vs_horizontal_split():
    xs, ys = np.meshgrid(np.linspace(0, 1, 8), np.linspace(0, 1, 8))
    pts = np.column_stack([xs.ravel(), ys.ravel()])
    gv = _graph_of(_cloud(pts, (pts[:, 0] > 0.5).astype(int)))
    gh = _graph_of(_cloud(pts, (pts[:, 1] > 0.5).astype(int)))
    sides_v = {0: ("left", "top", "bottom"), 1: ("right", "top", "bottom")}
    sides_h = {0: ("bottom", "left", "right"), 1: ("top", "left", "right")}
    ok, report = adjacency_isomorphic(gv, gh, {0: 0, 1: 1},
                                      sides_a=sides_v, sides_b=sides_h)
    assert not ok
    assert any("side contact" in line for line in report)


def test_adjacency_relabeled_copy():
    xs, ys = np.meshgrid(np.linspace(0, 1, 10), np.linspace(0, 1, 10))
    pts = np.column_stack([xs.ravel(), ys.ravel()])
    labels = (pts[:, 0] > 0.5).astype(int) + 2 * (pts[:, 1] > 0.5).astype(int)
    g1 = _graph_of(_cloud(pts, labels))
    perm = {0: 2, 1: 3, 2: 0, 3: 1}
    g2 = _graph_of(_cloud(pts, np.vectorize(perm.get)(labels)))
    ok, report = adjacency_isomorphic(g1, g2, perm)
    assert ok, report
    # the check is symmetric under inverting the correspondence
    inv = {v: k for k, v in perm.items()}
    ok_back, _ = adjacency_isomorphic(g2, g1, inv)
    assert ok_back


def test_adjacency_requires_bijection():
    xs, ys = np.meshgrid(np.linspace(0, 1, 8), np.linspace(0, 1, 8))
    pts = np.column_stack([xs.ravel(), ys.ravel()])
    g = _graph_of(_cloud(pts, (pts[:, 0] > 0.5).astype(int)))
    with pytest.raises(UnmappedLabel):
        adjacency_isomorphic(g, g, {0: 1, 1: 1})


def test_remove_outliers_drops_far_samples():
    rng = np.random.default_rng(5)
    pts = rng.normal(size=(200, 2))
    pts[0] = (50, 50)
    cloud = _cloud(pts, np.zeros(200, dtype=int))
    cleaned = remove_outliers(cloud, quantile=0.95)
    assert 0 not in cleaned.ids
    assert len(cleaned) >= 185


def test_transform_round_trip():
    t = LayoutTransform({0: np.array([1.0, -2.0]), 1: np.array([0.5, 0.5])})
    cloud = _cloud([(0, 0), (1, 1)], [0, 1])
    there = t.apply(cloud)
    back = t.inverse().apply(there)
    assert np.allclose(back.positions, cloud.positions)
