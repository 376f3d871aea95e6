"""Deterministic synthetic clouds used by tests, demos and the CLI docs."""

import numpy as np

from .cloud import LabeledPointCloud


def gaussian_clusters(centers, sigmas, points_per_cluster, seed=0,
                      id_offset=0):
    """Gaussian blob per class, one class per center, fixed seed."""
    rng = np.random.default_rng(seed)
    centers = np.asarray(centers, dtype=np.float64)
    k = len(centers)
    sigmas = np.broadcast_to(np.asarray(sigmas, dtype=np.float64), (k,))
    positions = []
    labels = []
    for label in range(k):
        pts = rng.normal(loc=centers[label], scale=sigmas[label],
                         size=(points_per_cluster, 2))
        positions.append(pts)
        labels.append(np.full(points_per_cluster, label))
    positions = np.vstack(positions)
    labels = np.concatenate(labels)
    ids = np.arange(id_offset, id_offset + len(labels))
    return LabeledPointCloud(ids=ids, positions=positions, labels=labels,
                             class_count=k)


def four_gaussian_cloud(seed=0, points_per_cluster=200, spread=4.0,
                        sigma=0.8):
    """The standard 4-cluster fixture: blobs near the corners of a square."""
    centers = [[0.0, 0.0], [spread, 0.5], [0.4, -spread], [spread, -spread - 0.3]]
    return gaussian_clusters(centers, sigma, points_per_cluster, seed=seed)


def two_domain_fixture(seed_source=11, seed_target=23, points_per_cluster=200):
    """Two independently generated 4-cluster domains with an identity class
    correspondence."""
    source = four_gaussian_cloud(seed=seed_source,
                                 points_per_cluster=points_per_cluster)
    target = gaussian_clusters(
        [[1.0, 0.5], [5.5, 0.0], [0.0, -4.5], [4.8, -5.2]],
        [0.7, 0.9, 0.75, 0.85], points_per_cluster, seed=seed_target)
    class_map = {0: 0, 1: 1, 2: 2, 3: 3}
    return source, target, class_map
