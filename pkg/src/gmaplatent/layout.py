"""Barycentric cluster translations: separation, grid layout, target
matching and the region-adjacency consistency check."""

from dataclasses import dataclass

import numpy as np

from .cloud import LabeledPointCloud
from .errors import (EmptyClass, NoConsistentLayout, NoConvergence,
                     UnmappedLabel)
from .mesh import OUTSIDE_LABEL, FeatureGraph


@dataclass(frozen=True)
class ClusterSummary:
    label: int
    barycenter: np.ndarray
    radius: float
    member_count: int


@dataclass(frozen=True)
class LayoutTransform:
    """Per-label rigid translation vectors."""

    translations: dict

    def vector(self, label):
        return self.translations.get(int(label), np.zeros(2))

    def apply(self, cloud: LabeledPointCloud) -> LabeledPointCloud:
        pos = np.array(cloud.positions)
        for label, t in self.translations.items():
            pos[cloud.labels == label] += t
        return cloud.with_positions(pos)

    def inverse(self):
        return LayoutTransform({k: -v for k, v in self.translations.items()})

    def compose(self, other):
        """Transform equivalent to applying ``self`` then ``other``."""
        labels = set(self.translations) | set(other.translations)
        return LayoutTransform(
            {k: self.vector(k) + other.vector(k) for k in sorted(labels)})


def summarize_clusters(cloud: LabeledPointCloud):
    """Barycenter, max radius and size for every class, in label order."""
    out = []
    for label in range(cloud.class_count):
        mask = cloud.labels == label
        if not mask.any():
            raise EmptyClass(f"class {label} has no samples")
        pts = cloud.positions[mask]
        bary = pts.mean(axis=0)
        radius = float(np.linalg.norm(pts - bary, axis=1).max())
        out.append(ClusterSummary(label=label, barycenter=bary, radius=radius,
                                  member_count=int(mask.sum())))
    return out


def separation_violations(summaries):
    """Cluster pairs with d_ij < r_i + r_j, worst first."""
    bad = []
    for i in range(len(summaries)):
        for j in range(i + 1, len(summaries)):
            si, sj = summaries[i], summaries[j]
            d = float(np.linalg.norm(sj.barycenter - si.barycenter))
            r = si.radius + sj.radius
            if d < r:
                bad.append((r - d, si.label, sj.label))
    bad.sort(reverse=True)
    return bad


def separate_clusters(cloud: LabeledPointCloud, max_sweeps: int = 100):
    """Translate clusters until every pair satisfies d_ij >= r_i + r_j.

    Sweeps ordered label pairs ascending; the higher-label cluster moves
    away along the center line by the deficit r_ij - d_ij.
    """
    work = cloud
    total = LayoutTransform({label: np.zeros(2) for label in range(cloud.class_count)})
    for _ in range(max_sweeps):
        summaries = summarize_clusters(work)
        if not separation_violations(summaries):
            return work, _freeze(total)
        moves = {s.label: np.zeros(2) for s in summaries}
        centers = {s.label: np.array(s.barycenter) for s in summaries}
        radii = {s.label: s.radius for s in summaries}
        max_radius = max(radii.values())
        jitter = 1e-6 * (max_radius if max_radius > 0 else 1.0)
        for i in range(cloud.class_count):
            for j in range(i + 1, cloud.class_count):
                ci = centers[i]
                cj = centers[j]
                delta = cj - ci
                d = float(np.hypot(*delta))
                if d == 0.0:
                    cj = cj + np.array([jitter, 0.0])
                    delta = cj - ci
                    d = jitter
                r = radii[i] + radii[j]
                if d < r:
                    step = (r - d) / d * delta
                    cj = cj + step
                centers[j] = cj
        for s in summaries:
            moves[s.label] = centers[s.label] - s.barycenter
        shift = LayoutTransform(moves)
        work = shift.apply(work)
        total = total.compose(shift)
    raise NoConvergence("cluster separation did not settle",
                        best=(work, _freeze(total)))


def _freeze(transform):
    out = {}
    for k, v in transform.translations.items():
        arr = np.asarray(v, dtype=np.float64)
        arr.setflags(write=False)
        out[int(k)] = arr
    return LayoutTransform(out)


def grid_layout(cloud: LabeledPointCloud, columns: int | None = None):
    """Place cluster barycenters row-major on a grid with spacing twice the
    largest cluster radius; labels ascending, origin top-left, y downwards."""
    summaries = summarize_clusters(cloud)
    if columns is None:
        columns = int(np.ceil(np.sqrt(cloud.class_count)))
    if columns < 1:
        raise ValueError("columns must be >= 1")
    spacing = 2.0 * max(s.radius for s in summaries)
    if spacing == 0.0:
        spacing = 1.0
    moves = {}
    for s in summaries:
        row, col = divmod(s.label, columns)
        target = np.array([col * spacing, -row * spacing])
        moves[s.label] = target - s.barycenter
    transform = _freeze(LayoutTransform(moves))
    return transform.apply(cloud), transform


def adjacency_relation(graph: FeatureGraph):
    """Region adjacency of a feature graph: the set of unordered label
    pairs joined by a chain, with OUTSIDE_LABEL marking hull contact."""
    return frozenset(c.label_pair for c in graph.chains)


def _map_pair(pair, table):
    a, b = pair
    ma = table.get(a, a) if a != OUTSIDE_LABEL else a
    mb = table.get(b, b) if b != OUTSIDE_LABEL else b
    return (min(ma, mb), max(ma, mb))


def adjacency_isomorphic(a: FeatureGraph, b: FeatureGraph, correspondence,
                         sides_a=None, sides_b=None):
    """Check that two feature graphs share the same region adjacency under
    a label correspondence.

    ``sides_a``/``sides_b`` optionally carry per-label square-side contact
    sets for straightened domains. Returns (bool, mismatch report).
    """
    labels_a = sorted(f.label for f in a.faces)
    labels_b = sorted(f.label for f in b.faces)
    mapped = [correspondence.get(x) for x in labels_a]
    if None in mapped or sorted(mapped) != labels_b:
        raise UnmappedLabel(
            f"correspondence is not a bijection: {labels_a} -> {labels_b}")

    rel_a = {_map_pair(p, correspondence) for p in adjacency_relation(a)}
    rel_b = set(adjacency_relation(b))
    report = []
    for pair in sorted(rel_a - rel_b):
        report.append(f"pair {pair} adjacent in source only")
    for pair in sorted(rel_b - rel_a):
        report.append(f"pair {pair} adjacent in target only")
    if sides_a is not None and sides_b is not None:
        for label in labels_a:
            sa = set(sides_a.get(label, ()))
            sb = set(sides_b.get(correspondence[label], ()))
            if sa != sb:
                report.append(
                    f"label {label}: side contact {sorted(sa)} vs {sorted(sb)}")
    return (not report), report


def match_layout_to_target(source: LabeledPointCloud, target_adjacency,
                           merge_probe, target_positions=None,
                           max_iterations: int = 20, step_factor: float = 0.1):
    """Iteratively nudge source clusters until the merged adjacency
    produced by ``merge_probe`` equals ``target_adjacency``.

    ``target_positions`` optionally seeds the layout with per-label
    barycenter targets (the matched target layout); labels must already be
    expressed in the target's label space.
    """
    work = source
    total = LayoutTransform({label: np.zeros(2) for label in range(source.class_count)})
    if target_positions:
        summaries = summarize_clusters(work)
        moves = {s.label: np.asarray(target_positions[s.label], dtype=np.float64)
                 - s.barycenter for s in summaries if s.label in target_positions}
        shift = LayoutTransform(moves)
        work = shift.apply(work)
        total = total.compose(shift)
    work, shift = separate_clusters(work)
    total = total.compose(shift)

    target_rel = frozenset(tuple(sorted(p)) for p in target_adjacency)
    factor = step_factor
    seen = set()
    for _ in range(max_iterations):
        current = frozenset(tuple(sorted(p)) for p in merge_probe(work))
        if current == target_rel:
            return work, _freeze(total)
        missing = sorted(p for p in target_rel - current
                         if OUTSIDE_LABEL not in p)
        if not missing:
            # only hull-contact or surplus-adjacency mismatches remain; the
            # nudge rule cannot remove adjacency, so surface the failure
            break
        key = (current, round(factor, 6))
        if key in seen:
            factor *= 0.5
        seen.add(key)
        summaries = {s.label: s for s in summarize_clusters(work)}
        moves = {label: np.zeros(2) for label in summaries}
        for a, b in missing:
            lo, hi = min(a, b), max(a, b)
            sa, sb = summaries[lo], summaries[hi]
            delta = sa.barycenter - sb.barycenter
            d = float(np.hypot(*delta))
            gap = d - (sa.radius + sb.radius)
            if d > 0 and gap > 0:
                moves[hi] = moves[hi] + factor * gap / d * delta
        shift = LayoutTransform(moves)
        work = shift.apply(work)
        total = total.compose(shift)
        work, shift = separate_clusters(work)
        total = total.compose(shift)
    raise NoConsistentLayout(
        "merged adjacency did not match the target within the iteration budget")


def remove_outliers(cloud: LabeledPointCloud, quantile: float = 0.95):
    """Outlier-free preprocessing: drop samples beyond the per-cluster
    distance quantile from their barycenter."""
    keep = np.ones(len(cloud), dtype=bool)
    for label in np.unique(cloud.labels):
        mask = cloud.labels == label
        pts = cloud.positions[mask]
        d = np.linalg.norm(pts - pts.mean(axis=0), axis=1)
        cut = np.quantile(d, quantile)
        sel = np.where(mask)[0]
        keep[sel[d > cut]] = False
    return cloud.subset(keep)
