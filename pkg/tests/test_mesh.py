import numpy as np
import pytest

from gmaplatent.cloud import LabeledPointCloud
from gmaplatent.errors import AllCollinear
from gmaplatent.geom import triangle_signed_areas
from gmaplatent.mesh import (OUTSIDE_LABEL, delaunay_triangulate,
                             extract_regions_and_graph)
from gmaplatent.predicates import incircle


def _cloud(points, labels=None, class_count=None):
    points = np.asarray(points, dtype=float)
    if labels is None:
        labels = np.zeros(len(points), dtype=int)
    labels = np.asarray(labels)
    if class_count is None:
        class_count = int(labels.max()) + 1
    return LabeledPointCloud(np.arange(len(points)), points, labels, class_count)


def _assert_delaunay(mesh, tol=1e-10):
    """Brute-force empty-circumcircle check over all triangles and points."""
    for tri in mesh.triangles:
        a, b, c = (mesh.vertices[tri[k]] for k in range(3))
        for v in range(mesh.n_vertices):
            if v in tri:
                continue
            p = mesh.vertices[v]
            assert incircle(a[0], a[1], b[0], b[1], c[0], c[1], p[0], p[1]) <= 0


def test_minimal_triangle():
    mesh = delaunay_triangulate(_cloud([(0, 0), (1, 0), (0, 1)]))
    assert mesh.n_triangles == 1
    assert len(mesh.boundary_loop) == 3


def test_square_lowest_index_diagonal():
    mesh = delaunay_triangulate(_cloud([(0, 0), (1, 0), (1, 1), (0, 1)]))
    assert mesh.n_triangles == 2
    edges = set()
    for tri in mesh.triangles:
        t = sorted(int(v) for v in tri)
        edges.update([(t[0], t[1]), (t[0], t[2]), (t[1], t[2])])
    assert (0, 2) in edges and (1, 3) not in edges


def test_grid_points_delaunay_property():
    xs, ys = np.meshgrid(np.linspace(0, 1, 8), np.linspace(0, 1, 8))
    mesh = delaunay_triangulate(_cloud(np.column_stack([xs.ravel(), ys.ravel()])))
    assert mesh.n_triangles == 98
    _assert_delaunay(mesh)
    areas = triangle_signed_areas(mesh.vertices, mesh.triangles)
    assert areas.min() > 0


def test_random_points_delaunay_and_hull():
    from scipy.spatial import ConvexHull

    rng = np.random.default_rng(7)
    pts = rng.random((200, 2))
    mesh = delaunay_triangulate(_cloud(pts))
    _assert_delaunay(mesh)
    hull = ConvexHull(pts)
    assert set(map(int, hull.vertices)) == set(map(int, mesh.boundary_loop))
    # boundary loop is CCW
    loop = mesh.vertices[mesh.boundary_loop]
    area = 0.5 * np.sum(loop[:, 0] * np.roll(loop[:, 1], -1)
                        - np.roll(loop[:, 0], -1) * loop[:, 1])
    assert area > 0


def test_matches_scipy_triangle_count():
    from scipy.spatial import Delaunay

    rng = np.random.default_rng(3)
    pts = rng.normal(size=(150, 2))
    mesh = delaunay_triangulate(_cloud(pts))
    ref = Delaunay(pts)
    assert mesh.n_triangles == len(ref.simplices)


def test_collinear_raises():
    with pytest.raises(AllCollinear):
        delaunay_triangulate(_cloud([(0, 0), (1, 1), (2, 2), (3, 3)]))


def test_duplicates_perturbed():
    pts = [(0, 0), (1, 0), (0, 1), (1, 0), (0.5, 0.5)]
    mesh = delaunay_triangulate(_cloud(pts))
    flat = mesh.vertices.round(12)
    assert len(np.unique(flat.view([("x", float), ("y", float)]))) == 5


def test_two_strip_graph():
    xs, ys = np.meshgrid(np.linspace(0, 1, 8), np.linspace(0, 1, 8))
    pts = np.column_stack([xs.ravel(), ys.ravel()])
    labels = (pts[:, 0] > 0.5).astype(int)
    mesh = extract_regions_and_graph(delaunay_triangulate(_cloud(labels=labels,
                                                                 points=pts)))
    graph = mesh.graph
    interior = [c for c in graph.chains if OUTSIDE_LABEL not in c.label_pair]
    assert len(interior) == 1
    assert len(graph.nodes) == 2
    # the chain runs from the bottom boundary to the top boundary near x=0.5
    for node in graph.nodes:
        assert mesh.vertices[node][1] in (0.0, 1.0)
        assert abs(mesh.vertices[node][0] - 0.5) < 0.15


def test_single_class_graph_is_boundary_only():
    rng = np.random.default_rng(5)
    mesh = extract_regions_and_graph(delaunay_triangulate(_cloud(rng.random((40, 2)))))
    assert mesh.graph.nodes == ()
    assert mesh.graph.chains == ()
    assert [f.label for f in mesh.graph.faces] == [0]


def test_island_relabeled():
    xs, ys = np.meshgrid(np.linspace(0, 1, 9), np.linspace(0, 1, 9))
    pts = np.column_stack([xs.ravel(), ys.ravel()])
    labels = (pts[:, 0] > 0.5).astype(int)
    clean = extract_regions_and_graph(delaunay_triangulate(_cloud(pts, labels)))

    wrong = labels.copy()
    deep = np.argmin(np.linalg.norm(pts - [0.15, 0.5], axis=1))
    wrong[deep] = 1    # one wrong-label vertex deep inside region 0
    mesh = extract_regions_and_graph(
        delaunay_triangulate(_cloud(pts, wrong)), island_threshold=0.01)
    assert np.array_equal(mesh.triangle_labels, clean.triangle_labels)
    # original vertex labels preserved
    assert mesh.vertex_labels[deep] == 1


def test_graph_euler_characteristic():
    xs, ys = np.meshgrid(np.linspace(0, 1, 10), np.linspace(0, 1, 10))
    pts = np.column_stack([xs.ravel(), ys.ravel()])
    labels = (pts[:, 0] > 0.5).astype(int) + 2 * (pts[:, 1] > 0.5).astype(int)
    mesh = extract_regions_and_graph(delaunay_triangulate(_cloud(pts, labels)))
    verts = set()
    edges = set()
    for c in mesh.graph.chains:
        verts.update(c.vertices)
        for a, b in zip(c.vertices, c.vertices[1:]):
            edges.add((min(a, b), max(a, b)))
    loop = mesh.boundary_loop
    for u, v in zip(loop, np.roll(loop, -1)):
        verts.update((int(u), int(v)))
        edges.add((min(int(u), int(v)), max(int(u), int(v))))
    faces = len(mesh.graph.faces) + 1   # include the outer face
    assert len(verts) - len(edges) + faces == 2


def test_chain_interiors_have_degree_two():
    xs, ys = np.meshgrid(np.linspace(0, 1, 10), np.linspace(0, 1, 10))
    pts = np.column_stack([xs.ravel(), ys.ravel()])
    labels = (pts[:, 0] > 0.5).astype(int) + 2 * (pts[:, 1] > 0.5).astype(int)
    mesh = extract_regions_and_graph(delaunay_triangulate(_cloud(pts, labels)))
    node_set = set(mesh.graph.nodes)
    seen = {}
    for c in mesh.graph.chains:
        for v in c.vertices[1:-1]:
            assert v not in node_set
            seen[v] = seen.get(v, 0) + 1
    # chain interiors are visited by exactly one chain
    assert all(count == 1 for count in seen.values())
