"""Small shared 2D helpers used across the geometry modules."""

import numpy as np


def signed_area(a, b, c):
    """Twice-free signed area of triangle (a, b, c); positive for CCW."""
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))


def triangle_signed_areas(vertices, triangles):
    """Signed areas of all triangles, vectorized."""
    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]]
    c = vertices[triangles[:, 2]]
    return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
                  - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))


def barycentric_coords(a, b, c, p):
    """Barycentric coordinates of p in triangle (a, b, c)."""
    det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    l0 = ((b[0] - p[0]) * (c[1] - p[1]) - (b[1] - p[1]) * (c[0] - p[0])) / det
    l1 = ((c[0] - p[0]) * (a[1] - p[1]) - (c[1] - p[1]) * (a[0] - p[0])) / det
    return np.array([l0, l1, 1.0 - l0 - l1])


def point_segment_distance(p, a, b):
    """Distance from point p to segment [a, b], and the closest parameter t."""
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.hypot(*(p - a))), 0.0
    t = float((p - a) @ ab) / denom
    t = min(1.0, max(0.0, t))
    closest = a + t * ab
    return float(np.hypot(*(p - closest))), t


def polygon_area(points):
    """Signed area of a closed polygon given as an (n, 2) array."""
    x = points[:, 0]
    y = points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_is_convex(points, tol=1e-9):
    """True if the CCW polygon turns one way everywhere (collinear runs ok)."""
    n = len(points)
    if n < 3:
        return False
    scale = max(1.0, float(np.abs(points).max()))
    for i in range(n):
        a = points[i]
        b = points[(i + 1) % n]
        c = points[(i + 2) % n]
        cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if cross < -tol * scale * scale:
            return False
    return True


def point_in_convex_polygon(p, points, tol=1e-9):
    """True if p lies inside or on the CCW convex polygon."""
    n = len(points)
    for i in range(n):
        a = points[i]
        b = points[(i + 1) % n]
        cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
        if cross < -tol:
            return False
    return True
