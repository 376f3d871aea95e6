"""Point location and piecewise-linear map evaluation.

Location uses a uniform bucket grid over triangle bounding boxes; a query
point is tested against the candidate triangles with barycentric
coordinates only. Queries outside the mesh return the nearest boundary
triangle with clamped coordinates and an ``outside`` flag.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NonInvertible
from .geom import barycentric_coords, point_segment_distance, triangle_signed_areas

_IN_TOL = -1e-12


@dataclass(frozen=True)
class LocateResult:
    triangle: int
    coords: np.ndarray
    outside: bool


class _BucketGrid:
    """Uniform grid of triangle-id buckets for fast candidate lookup."""

    def __init__(self, vertices, triangles, resolution=None):
        self.vertices = vertices
        self.triangles = triangles
        lo = vertices.min(axis=0)
        hi = vertices.max(axis=0)
        span = np.maximum(hi - lo, 1e-30)
        if resolution is None:
            resolution = max(4, int(np.sqrt(len(triangles))) + 1)
        self.lo = lo
        self.res = resolution
        self.cell = span / resolution
        self.buckets = {}
        tv = vertices[triangles]
        tlo = tv.min(axis=1)
        thi = tv.max(axis=1)
        for t in range(len(triangles)):
            i0, j0 = self._cell_of(tlo[t])
            i1, j1 = self._cell_of(thi[t])
            for i in range(i0, i1 + 1):
                for j in range(j0, j1 + 1):
                    self.buckets.setdefault((i, j), []).append(t)

    def _cell_of(self, p):
        ij = np.floor((p - self.lo) / self.cell).astype(int)
        return (int(np.clip(ij[0], 0, self.res - 1)),
                int(np.clip(ij[1], 0, self.res - 1)))

    def candidates(self, p):
        return self.buckets.get(self._cell_of(p), ())


class PointLocator:
    """Reusable locator over one triangulation (positions + triangles)."""

    def __init__(self, vertices, triangles, boundary_loop):
        self.vertices = np.asarray(vertices, dtype=np.float64)
        self.triangles = np.asarray(triangles, dtype=np.int64)
        self.boundary_loop = np.asarray(boundary_loop, dtype=np.int64)
        self._grid = _BucketGrid(self.vertices, self.triangles)
        self._boundary_edges = None

    def _bary(self, t, p):
        tri = self.triangles[t]
        return barycentric_coords(self.vertices[tri[0]], self.vertices[tri[1]],
                                  self.vertices[tri[2]], p)

    def locate(self, point):
        """Containing triangle and clamped barycentric coordinates.

        Falls back to the nearest boundary triangle for outside queries.
        """
        p = np.asarray(point, dtype=np.float64)
        best = None
        for t in self._grid.candidates(p):
            coords = self._bary(t, p)
            worst = float(coords.min())
            if worst >= _IN_TOL:
                return LocateResult(int(t), _clamp(coords), False)
            if best is None or worst > best[1]:
                best = (t, worst)
        # bucket miss: exhaustive scan before declaring the point outside
        for t in range(len(self.triangles)):
            coords = self._bary(t, p)
            if float(coords.min()) >= _IN_TOL:
                return LocateResult(int(t), _clamp(coords), False)
        return self._nearest_boundary(p)

    def _edges(self):
        if self._boundary_edges is None:
            # triangle owning each directed boundary edge
            owner = {}
            for t, (a, b, c) in enumerate(self.triangles):
                owner[(int(a), int(b))] = t
                owner[(int(b), int(c))] = t
                owner[(int(c), int(a))] = t
            edges = []
            loop = self.boundary_loop
            for u, v in zip(loop, np.roll(loop, -1)):
                t = owner.get((int(u), int(v)))
                if t is None:
                    t = owner.get((int(v), int(u)))
                edges.append((int(u), int(v), int(t)))
            self._boundary_edges = edges
        return self._boundary_edges

    def _nearest_boundary(self, p):
        best = (np.inf, -1)
        for (u, v, t) in self._edges():
            d, _ = point_segment_distance(p, self.vertices[u], self.vertices[v])
            if d < best[0] or (d == best[0] and t < best[1]):
                best = (d, t)
        t = best[1]
        coords = _clamp(self._bary(t, p))
        return LocateResult(int(t), coords, True)


def _clamp(coords):
    c = np.clip(coords, 0.0, 1.0)
    s = float(c.sum())
    return c / s if s > 0 else np.full(3, 1.0 / 3.0)


def point_locate(mesh, query):
    """One-shot location in a decorated mesh; prefer a cached
    :class:`PointLocator` for repeated queries."""
    loc = PointLocator(mesh.vertices, mesh.triangles, mesh.boundary_loop)
    return loc.locate(query)


class PiecewiseLinearMap:
    """Triangulated source domain plus one target position per vertex.

    Forward evaluation locates the query in the source triangulation and
    applies its barycentric coordinates to the target positions; inverse
    evaluation swaps the roles. Inverse evaluation requires an
    orientation-preserving map (no flipped target triangles).
    """

    def __init__(self, source_mesh, target_positions):
        target = np.ascontiguousarray(target_positions, dtype=np.float64)
        if target.shape != (source_mesh.n_vertices, 2):
            raise ValueError("one target position required per source vertex")
        target.setflags(write=False)
        self.source_mesh = source_mesh
        self.target_positions = target
        areas = triangle_signed_areas(target, source_mesh.triangles)
        self.flipped_count = int(np.sum(areas <= 0))
        self.min_target_area = float(areas.min()) if len(areas) else 0.0
        self._fwd = PointLocator(source_mesh.vertices, source_mesh.triangles,
                                 source_mesh.boundary_loop)
        self._inv = None

    @property
    def orientation_preserving(self):
        return self.flipped_count == 0

    def _inverse_locator(self):
        if not self.orientation_preserving:
            raise NonInvertible(
                f"map has {self.flipped_count} flipped triangles")
        if self._inv is None:
            self._inv = PointLocator(self.target_positions,
                                     self.source_mesh.triangles,
                                     self.source_mesh.boundary_loop)
        return self._inv

    def evaluate(self, query, direction="forward"):
        """Map one point; returns (image point, extrapolated flag)."""
        if direction == "forward":
            loc = self._fwd.locate(query)
            values = self.target_positions
        elif direction == "inverse":
            loc = self._inverse_locator().locate(query)
            values = self.source_mesh.vertices
        else:
            raise ValueError(f"unknown direction {direction!r}")
        tri = self.source_mesh.triangles[loc.triangle]
        out = (loc.coords[0] * values[tri[0]] + loc.coords[1] * values[tri[1]]
               + loc.coords[2] * values[tri[2]])
        return out, loc.outside

    def max_operator_norm(self):
        """Largest per-triangle operator norm of the forward linear pieces."""
        src = self.source_mesh.vertices
        dst = self.target_positions
        tris = self.source_mesh.triangles
        worst = 0.0
        for tri in tris:
            s = np.column_stack([src[tri[1]] - src[tri[0]], src[tri[2]] - src[tri[0]]])
            d = np.column_stack([dst[tri[1]] - dst[tri[0]], dst[tri[2]] - dst[tri[0]]])
            jac = d @ np.linalg.inv(s)
            worst = max(worst, float(np.linalg.norm(jac, 2)))
        return worst


def pl_eval(pl_map, query, direction="forward"):
    """Evaluate a piecewise-linear map at one query point."""
    out, _ = pl_map.evaluate(query, direction)
    return out
