import numpy as np
import pytest

from gmaplatent.cloud import LabeledPointCloud
from gmaplatent.errors import NonInvertible
from gmaplatent.mesh import delaunay_triangulate
from gmaplatent.plmap import PiecewiseLinearMap, PointLocator, point_locate


def _mesh(points):
    points = np.asarray(points, dtype=float)
    cloud = LabeledPointCloud(np.arange(len(points)), points,
                              np.zeros(len(points), dtype=int), 1)
    return delaunay_triangulate(cloud)


@pytest.fixture(scope="module")
def random_mesh():
    rng = np.random.default_rng(17)
    return _mesh(rng.random((120, 2)))


def test_locate_centroid():
    mesh = _mesh([(0, 0), (1, 0), (0, 1)])
    res = point_locate(mesh, (1 / 3, 1 / 3))
    assert not res.outside
    assert np.allclose(res.coords, [1 / 3, 1 / 3, 1 / 3])


def test_locate_vertex_unit_coords():
    mesh = _mesh([(0, 0), (1, 0), (0, 1), (1, 1)])
    res = point_locate(mesh, (1, 0))
    assert not res.outside
    assert np.isclose(sorted(res.coords)[-1], 1.0)
    assert np.isclose(res.coords.sum(), 1.0)


def test_locate_matches_exhaustive_scan(random_mesh):
    from gmaplatent.geom import barycentric_coords

    rng = np.random.default_rng(4)
    locator = PointLocator(random_mesh.vertices, random_mesh.triangles,
                           random_mesh.boundary_loop)
    for _ in range(200):
        q = rng.random(2)
        res = locator.locate(q)
        if res.outside:
            continue
        # oracle: first triangle containing q in index order
        hits = []
        for t, tri in enumerate(random_mesh.triangles):
            coords = barycentric_coords(random_mesh.vertices[tri[0]],
                                        random_mesh.vertices[tri[1]],
                                        random_mesh.vertices[tri[2]], q)
            if coords.min() >= -1e-12:
                hits.append(t)
        assert res.triangle in hits


def test_outside_query_flagged(random_mesh):
    locator = PointLocator(random_mesh.vertices, random_mesh.triangles,
                           random_mesh.boundary_loop)
    res = locator.locate((5.0, 5.0))
    assert res.outside
    assert res.coords.min() >= 0 and np.isclose(res.coords.sum(), 1.0)


def test_identity_map(random_mesh):
    m = PiecewiseLinearMap(random_mesh, random_mesh.vertices)
    q = np.array([0.4, 0.55])
    out, ex = m.evaluate(q)
    assert not ex
    assert np.allclose(out, q, atol=1e-12)


def test_scaling_map():
    mesh = _mesh([(0, 0), (1, 0), (0, 1), (1, 1)])
    m = PiecewiseLinearMap(mesh, 2.0 * mesh.vertices)
    out, _ = m.evaluate((0.3, 0.4))
    assert np.allclose(out, (0.6, 0.8))
    assert np.isclose(m.max_operator_norm(), 2.0)


def test_forward_inverse_round_trip(random_mesh):
    rng = np.random.default_rng(99)
    # a gentle smooth deformation keeps orientation
    v = random_mesh.vertices
    target = v + 0.02 * np.column_stack([np.sin(2 * v[:, 1]), np.cos(2 * v[:, 0])])
    m = PiecewiseLinearMap(random_mesh, target)
    assert m.orientation_preserving
    inside = 0
    for _ in range(1000):
        q = 0.1 + 0.8 * rng.random(2)
        mid, ex1 = m.evaluate(q)
        back, ex2 = m.evaluate(mid, "inverse")
        if ex1 or ex2:
            continue
        inside += 1
        assert np.linalg.norm(back - q) < 1e-9
    assert inside > 900


def test_flipped_map_rejects_inverse():
    mesh = _mesh([(0, 0), (1, 0), (0, 1), (1, 1)])
    target = np.array(mesh.vertices)
    target[3] = (-1.0, -1.0)    # fold the far corner across the diagonal
    m = PiecewiseLinearMap(mesh, target)
    assert not m.orientation_preserving
    with pytest.raises(NonInvertible):
        m.evaluate((0.5, 0.5), "inverse")


def test_vertex_queries_map_exactly(random_mesh):
    rng = np.random.default_rng(1)
    target = random_mesh.vertices + rng.normal(scale=0.01,
                                               size=random_mesh.vertices.shape)
    m = PiecewiseLinearMap(random_mesh, target)
    for v in range(0, random_mesh.n_vertices, 7):
        out, _ = m.evaluate(random_mesh.vertices[v])
        assert np.linalg.norm(out - target[v]) < 1e-12
