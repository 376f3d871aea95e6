"""Delaunay triangulation and labeled region / feature-graph extraction.

The triangulation is an incremental Bowyer-Watson construction over exact
predicates with a ghost-vertex hull, so degenerate (cocircular, collinear)
inputs are resolved deterministically: points are inserted in ascending
index order and an on-circle point never invalidates an existing triangle,
which makes the square-with-two-diagonals case pick the lowest-index
diagonal.
"""

from dataclasses import dataclass, replace

import numpy as np

from .cloud import LabeledPointCloud
from .errors import (AllCollinear, DuplicateAfterPerturbation, EmptyRegion,
                     RegionFragmentation)
from .geom import triangle_signed_areas
from .predicates import incircle, orient2d

GHOST = -1
OUTSIDE_LABEL = -1


@dataclass(frozen=True)
class Chain:
    """Ordered vertex path between two graph nodes.

    ``left_label``/``right_label`` are the region labels seen when walking
    the chain in storage order; the outer side of a boundary chain is
    ``OUTSIDE_LABEL``.
    """

    vertices: tuple
    left_label: int
    right_label: int

    @property
    def label_pair(self):
        return (min(self.left_label, self.right_label),
                max(self.left_label, self.right_label))


@dataclass(frozen=True)
class Face:
    """One labeled region: its CCW boundary cycle over graph vertices."""

    label: int
    boundary: tuple


@dataclass(frozen=True)
class FeatureGraph:
    """Region-boundary graph of a decorated mesh.

    Nodes are graph vertices of degree != 2 (junctions, and boundary
    vertices where an interior region boundary meets the hull). Chains are
    the node-to-node paths; their interiors have graph degree exactly 2.
    """

    nodes: tuple
    chains: tuple
    faces: tuple

    @property
    def edge_count(self):
        interior = sum(len(c.vertices) - 1 for c in self.chains)
        return interior

    def chains_between(self, label_a, label_b):
        pair = (min(label_a, label_b), max(label_a, label_b))
        return [c for c in self.chains if c.label_pair == pair]


@dataclass(frozen=True)
class DecoratedMesh:
    """Triangulation with per-vertex sample labels and per-triangle region
    labels; ``graph`` is populated by :func:`extract_regions_and_graph`."""

    ids: np.ndarray
    vertices: np.ndarray
    triangles: np.ndarray
    vertex_labels: np.ndarray
    triangle_labels: np.ndarray
    boundary_loop: np.ndarray
    class_count: int
    graph: FeatureGraph | None = None

    def __post_init__(self):
        for name in ("ids", "vertices", "triangles", "vertex_labels",
                     "triangle_labels", "boundary_loop"):
            arr = np.ascontiguousarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    def edge_triangle_map(self):
        """Map directed edge (u, v) -> triangle index containing it CCW."""
        out = {}
        for t, (a, b, c) in enumerate(self.triangles):
            out[(int(a), int(b))] = t
            out[(int(b), int(c))] = t
            out[(int(c), int(a))] = t
        return out

    def with_graph(self, triangle_labels, graph):
        return replace(self, triangle_labels=triangle_labels, graph=graph)


# ---------------------------------------------------------------------------
# Bowyer-Watson triangulation
# ---------------------------------------------------------------------------

def _perturb_duplicates(positions, ids, seed):
    """Displace repeated coordinates by a deterministic per-id offset of
    magnitude 1e-9 * domain diameter."""
    pos = np.array(positions, dtype=np.float64)
    lo = pos.min(axis=0)
    hi = pos.max(axis=0)
    diameter = float(np.hypot(*(hi - lo))) or 1.0
    seen = {}
    perturbed = False
    for i in range(len(pos)):
        key = (pos[i, 0], pos[i, 1])
        if key in seen:
            angle = 2.0 * np.pi * (((int(ids[i]) + 1) * 0.6180339887498949
                                    + seed * 0.2718281828459045) % 1.0)
            pos[i, 0] += 1e-9 * diameter * np.cos(angle)
            pos[i, 1] += 1e-9 * diameter * np.sin(angle)
            perturbed = True
            key = (pos[i, 0], pos[i, 1])
            if key in seen:
                raise DuplicateAfterPerturbation(
                    f"samples {seen[key]} and {ids[i]} still coincide")
        seen[key] = ids[i]
    return pos, perturbed


class _Triangulator:
    """Incremental Delaunay state: triangle store plus directed-edge map."""

    def __init__(self, points):
        self.pts = points
        self.tris = []          # vertex triples, GHOST = -1 allowed
        self.alive = []
        self.edge = {}          # directed edge -> triangle index
        self.last_finite = 0

    def _add(self, a, b, c):
        t = len(self.tris)
        self.tris.append((a, b, c))
        self.alive.append(True)
        self.edge[(a, b)] = t
        self.edge[(b, c)] = t
        self.edge[(c, a)] = t
        if a != GHOST and b != GHOST and c != GHOST:
            self.last_finite = t
        return t

    def _kill(self, t):
        self.alive[t] = False

    def _orient(self, i, j, px, py):
        pi = self.pts[i]
        pj = self.pts[j]
        return orient2d(pi[0], pi[1], pj[0], pj[1], px, py)

    def _in_cavity(self, t, px, py):
        a, b, c = self.tris[t]
        if GHOST in (a, b, c):
            # rotate the ghost into third position
            while c != GHOST:
                a, b, c = b, c, a
            side = self._orient(a, b, px, py)
            if side > 0:
                return True
            if side == 0:
                # on the open hull edge: the edge must split; beyond it the
                # neighboring ghosts take over (degenerate slivers otherwise)
                pa = self.pts[a]
                pb = self.pts[b]
                d = pb - pa
                s = (px - pa[0]) * d[0] + (py - pa[1]) * d[1]
                return 0.0 < s < float(d @ d)
            return False
        pa, pb, pc = self.pts[a], self.pts[b], self.pts[c]
        return incircle(pa[0], pa[1], pb[0], pb[1], pc[0], pc[1], px, py) > 0

    def _locate(self, px, py):
        """Visibility walk from the last finite triangle."""
        t = self.last_finite
        if not self.alive[t]:
            t = next(i for i in range(len(self.tris) - 1, -1, -1)
                     if self.alive[i] and GHOST not in self.tris[i])
        for _ in range(4 * len(self.tris) + 16):
            a, b, c = self.tris[t]
            moved = False
            for (u, v) in ((a, b), (b, c), (c, a)):
                if self._orient(u, v, px, py) < 0:
                    t = self.edge[(v, u)]
                    moved = True
                    break
            if not moved:
                return t
            if GHOST in self.tris[t]:
                return t
        raise RuntimeError("point location walk failed to terminate")

    def insert(self, i):
        px, py = self.pts[i]
        seed = self._locate(px, py)
        if not self._in_cavity(seed, px, py):
            # on-circle or on-hull degeneracies: scan the seed's neighbors
            for (u, v) in self._edges_of(seed):
                n = self.edge.get((v, u))
                if n is not None and self.alive[n] and self._in_cavity(n, px, py):
                    seed = n
                    break
            else:
                raise RuntimeError("no cavity found for inserted point")
        # grow the cavity
        cavity = {seed}
        stack = [seed]
        while stack:
            t = stack.pop()
            for (u, v) in self._edges_of(t):
                n = self.edge.get((v, u))
                if n is None or not self.alive[n] or n in cavity:
                    continue
                if self._in_cavity(n, px, py):
                    cavity.add(n)
                    stack.append(n)
        # boundary of the cavity, then retriangulate
        boundary = []
        for t in cavity:
            for (u, v) in self._edges_of(t):
                n = self.edge.get((v, u))
                if n is None or n not in cavity:
                    boundary.append((u, v))
        for t in cavity:
            self._kill(t)
        for (u, v) in boundary:
            self._add(u, v, i)

    def _edges_of(self, t):
        a, b, c = self.tris[t]
        return ((a, b), (b, c), (c, a))

    def finite_triangles(self):
        out = [tri for tri, ok in zip(self.tris, self.alive)
               if ok and GHOST not in tri]
        return np.array(out, dtype=np.int64)

    def hull_loop(self):
        """CCW hull cycle read off the ghost-triangle ring."""
        nxt = {}
        for tri, ok in zip(self.tris, self.alive):
            if ok and GHOST in tri:
                a, b, c = tri
                while c != GHOST:
                    a, b, c = b, c, a
                nxt[b] = a     # ghost triangle (b, a, GHOST) covers hull edge a->b
        start = min(nxt)
        loop = [start]
        cur = nxt[start]
        while cur != start:
            loop.append(cur)
            cur = nxt[cur]
        return np.array(loop, dtype=np.int64)


def _bowyer_watson(points):
    n = len(points)
    order = list(range(n))
    # first non-collinear triple seeds the triangulation
    k = 2
    side = 0
    while k < n:
        side = orient2d(points[0][0], points[0][1], points[1][0], points[1][1],
                        points[k][0], points[k][1])
        if side != 0:
            break
        k += 1
    if k >= n:
        raise AllCollinear("all input points lie on a single line")
    tr = _Triangulator(points)
    if side > 0:
        a, b, c = 0, 1, k
    else:
        a, b, c = 0, k, 1
    tr._add(a, b, c)
    tr._add(b, a, GHOST)
    tr._add(c, b, GHOST)
    tr._add(a, c, GHOST)
    for i in order:
        if i in (0, 1, k):
            continue
        tr.insert(i)
    return tr.finite_triangles(), tr.hull_loop()


def delaunay_triangulate(cloud: LabeledPointCloud, seed: int = 0) -> DecoratedMesh:
    """Delaunay triangulation of the cloud; the feature graph is extracted
    separately by :func:`extract_regions_and_graph`.

    Duplicate positions are perturbed deterministically. Raises
    ``AllCollinear`` when no triangle exists.
    """
    if len(cloud) < 3:
        raise AllCollinear("need at least 3 points")
    positions, _ = _perturb_duplicates(cloud.positions, cloud.ids, seed)
    triangles, hull = _bowyer_watson(positions)
    return DecoratedMesh(
        ids=cloud.ids,
        vertices=positions,
        triangles=triangles,
        vertex_labels=cloud.labels,
        triangle_labels=np.full(len(triangles), -1, dtype=np.int64),
        boundary_loop=hull,
        class_count=cloud.class_count,
    )


# ---------------------------------------------------------------------------
# Region labeling and feature graph
# ---------------------------------------------------------------------------

def _majority_labels(mesh):
    """Per-triangle label by majority vertex vote, ties to smallest label."""
    out = np.empty(mesh.n_triangles, dtype=np.int64)
    vl = mesh.vertex_labels
    for t, tri in enumerate(mesh.triangles):
        a, b, c = vl[tri[0]], vl[tri[1]], vl[tri[2]]
        if a == b or a == c:
            out[t] = a
        elif b == c:
            out[t] = b
        else:
            out[t] = min(a, b, c)
    return out


def _triangle_adjacency(mesh):
    edge = mesh.edge_triangle_map()
    adj = np.full((mesh.n_triangles, 3), -1, dtype=np.int64)
    for t, (a, b, c) in enumerate(mesh.triangles):
        for k, (u, v) in enumerate(((int(a), int(b)), (int(b), int(c)),
                                    (int(c), int(a)))):
            adj[t, k] = edge.get((v, u), -1)
    return adj


def _label_components(labels, adj):
    """Connected components of equal-label triangles; returns an array of
    component ids and a list of (label, triangle index list)."""
    comp = np.full(len(labels), -1, dtype=np.int64)
    comps = []
    for t in range(len(labels)):
        if comp[t] >= 0:
            continue
        cid = len(comps)
        members = [t]
        comp[t] = cid
        stack = [t]
        while stack:
            cur = stack.pop()
            for n in adj[cur]:
                if n >= 0 and comp[n] < 0 and labels[n] == labels[t]:
                    comp[n] = cid
                    members.append(int(n))
                    stack.append(int(n))
        comps.append((int(labels[t]), members))
    return comp, comps


def _relabel_islands(mesh, tri_labels, island_threshold):
    """Absorb label islands into their surrounding region, in place."""
    adj = _triangle_adjacency(mesh)
    for _ in range(100):
        comp, comps = _label_components(tri_labels, adj)
        per_label = {}
        for cid, (label, members) in enumerate(comps):
            per_label.setdefault(label, []).append((cid, members))
        # main component per label: the one owning the vertex nearest the
        # label's barycenter
        main = {}
        for label, entries in per_label.items():
            if len(entries) == 1:
                main[label] = entries[0][0]
                continue
            sel = np.where(mesh.vertex_labels == label)[0]
            if len(sel):
                bary = mesh.vertices[sel].mean(axis=0)
                d = np.linalg.norm(mesh.vertices[sel] - bary, axis=1)
                anchor = int(sel[int(np.argmin(d))])
            else:
                anchor = -1
            chosen = None
            for cid, members in entries:
                if anchor >= 0 and any(anchor in mesh.triangles[t] for t in members):
                    chosen = cid
                    break
            if chosen is None:
                chosen = max(entries, key=lambda e: (len(e[1]), -e[0]))[0]
            main[label] = chosen
        islands = []
        for label, entries in per_label.items():
            total = sum(len(m) for _, m in entries)
            for cid, members in entries:
                small = len(members) < island_threshold * total
                if cid != main[label] or (small and len(entries) > 1):
                    islands.append((cid, label, members))
        if not islands:
            return tri_labels
        changed = False
        for cid, label, members in islands:
            votes = {}
            mset = set(members)
            for t in members:
                for n in adj[t]:
                    if n >= 0 and int(n) not in mset and tri_labels[n] != label:
                        votes[int(tri_labels[n])] = votes.get(int(tri_labels[n]), 0) + 1
            if not votes:
                continue    # island touches only the outer boundary; keep
            new_label = max(sorted(votes), key=lambda k: votes[k])
            tri_labels[members] = new_label
            changed = True
        if not changed:
            return tri_labels
    return tri_labels


def _graph_edges(mesh, tri_labels):
    """Undirected graph edges with their (left, right) labels for the
    canonical direction u < v, traversing u -> v."""
    edge_tri = mesh.edge_triangle_map()
    out = {}
    for (u, v), t in edge_tri.items():
        other = edge_tri.get((v, u))
        if other is not None and u > v:
            continue        # interior edge handled from its low-index side
        left = int(tri_labels[t])
        right = OUTSIDE_LABEL if other is None else int(tri_labels[other])
        if other is None or left != right:
            if u < v:
                out[(u, v)] = (left, right)
            else:
                out[(v, u)] = (right, left)
    return out


def _chain_from(start, first, neighbor_map, node_set):
    path = [start, first]
    prev, cur = start, first
    while cur not in node_set:
        nbrs = neighbor_map[cur]
        nxt = nbrs[0] if nbrs[1] == prev else nbrs[1]
        path.append(nxt)
        prev, cur = cur, nxt
        if cur == start and len(path) > 2 and start not in node_set:
            break
    return path


def extract_regions_and_graph(mesh: DecoratedMesh,
                              island_threshold: float = 0.02) -> DecoratedMesh:
    """Assign region labels to triangles, absorb label islands and extract
    the feature graph (nodes, chains, faces).

    Raises ``RegionFragmentation`` if a class keeps more than one component
    (or a region is not simply connected) and ``EmptyRegion`` if a class
    loses all triangles.
    """
    tri_labels = _majority_labels(mesh)
    tri_labels = _relabel_islands(mesh, tri_labels, island_threshold)

    present_vertex_labels = np.unique(mesh.vertex_labels)
    present = np.unique(tri_labels)
    for label in present_vertex_labels:
        if label not in present:
            raise EmptyRegion(f"class {label} lost all triangles")
    adj = _triangle_adjacency(mesh)
    _, comps = _label_components(tri_labels, adj)
    counts = {}
    for label, _members in comps:
        counts[label] = counts.get(label, 0) + 1
    frag = sorted(label for label, c in counts.items() if c > 1)
    if frag:
        raise RegionFragmentation(
            f"classes {frag} still occupy multiple regions after relabeling")

    graph_edges = _graph_edges(mesh, tri_labels)
    degree = {}
    neighbor_map = {}
    for (u, v) in graph_edges:
        degree[u] = degree.get(u, 0) + 1
        degree[v] = degree.get(v, 0) + 1
        neighbor_map.setdefault(u, []).append(v)
        neighbor_map.setdefault(v, []).append(u)
    nodes = sorted(v for v, d in degree.items() if d != 2)

    chains = []
    visited_edges = set()
    node_set = set(nodes)
    for node in nodes:
        for nbr in sorted(neighbor_map[node]):
            e = (min(node, nbr), max(node, nbr))
            if e in visited_edges:
                continue
            path = _chain_from(node, nbr, neighbor_map, node_set)
            for a, b in zip(path, path[1:]):
                visited_edges.add((min(a, b), max(a, b)))
            left, right = _chain_labels(path, graph_edges)
            chains.append(Chain(tuple(int(x) for x in path), left, right))
    leftovers = set(graph_edges) - visited_edges
    boundary_edge_set = {
        (min(int(a), int(b)), max(int(a), int(b)))
        for a, b in zip(mesh.boundary_loop,
                        np.roll(mesh.boundary_loop, -1))}
    interior_leftovers = leftovers - boundary_edge_set
    if interior_leftovers:
        raise RegionFragmentation(
            "region boundary contains a closed loop without nodes "
            "(an enclosed region)")

    faces = _extract_faces(mesh, tri_labels, graph_edges)
    graph = FeatureGraph(nodes=tuple(int(n) for n in nodes),
                         chains=tuple(chains), faces=tuple(faces))
    return mesh.with_graph(tri_labels, graph)


def _chain_labels(path, graph_edges):
    u, v = path[0], path[1]
    if (u, v) in graph_edges:
        left, right = graph_edges[(u, v)]
    else:
        right, left = graph_edges[(v, u)]
    return left, right


def _extract_faces(mesh, tri_labels, graph_edges):
    """Boundary cycle of each labeled region, CCW (region on the left)."""
    # directed edges with the region on the left
    per_label = {}
    for (u, v), (left, right) in graph_edges.items():
        if left != OUTSIDE_LABEL:
            per_label.setdefault(left, {})[u] = v
        if right != OUTSIDE_LABEL:
            per_label.setdefault(right, {})[v] = u
    faces = []
    for label in sorted(per_label):
        nxt = per_label[label]
        start = min(nxt)
        cycle = [start]
        cur = nxt[start]
        guard = 0
        while cur != start:
            cycle.append(cur)
            if cur not in nxt:
                raise RegionFragmentation(
                    f"region {label} boundary is not a closed cycle")
            cur = nxt[cur]
            guard += 1
            if guard > len(nxt) + 1:
                raise RegionFragmentation(
                    f"region {label} boundary is not a simple cycle")
        if len(cycle) != len(nxt):
            raise RegionFragmentation(
                f"region {label} boundary is not a simple cycle")
        faces.append(Face(label=int(label), boundary=tuple(cycle)))
    return faces


def mesh_orientation_ok(mesh):
    """True when every triangle has positive signed area."""
    return bool(triangle_signed_areas(mesh.vertices, mesh.triangles).min() > 0)
