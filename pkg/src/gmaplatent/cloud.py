"""Labeled 2D point clouds: the in-memory form of a latent space."""

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyClass


@dataclass(frozen=True)
class LabeledPointCloud:
    """2D latent codes with integer class labels and stable sample ids.

    ``ids`` must be unique and ``labels`` must lie in ``[0, class_count)``.
    Arrays are copied and frozen at construction.
    """

    ids: np.ndarray
    positions: np.ndarray
    labels: np.ndarray
    class_count: int

    def __post_init__(self):
        ids = np.ascontiguousarray(self.ids, dtype=np.int64)
        pos = np.ascontiguousarray(self.positions, dtype=np.float64)
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ValueError("positions must be an (n, 2) array")
        if not (len(ids) == len(pos) == len(labels)):
            raise ValueError("ids, positions and labels must have equal length")
        if len(np.unique(ids)) != len(ids):
            raise ValueError("sample ids must be unique")
        if len(labels) and (labels.min() < 0 or labels.max() >= self.class_count):
            raise ValueError("labels must lie in [0, class_count)")
        for arr in (ids, pos, labels):
            arr.setflags(write=False)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.ids)

    @property
    def present_labels(self):
        return np.unique(self.labels)

    def class_members(self, label):
        """Index mask of the samples carrying ``label``."""
        mask = self.labels == label
        if not mask.any():
            raise EmptyClass(f"class {label} has no samples")
        return mask

    def with_positions(self, positions):
        """Copy of the cloud with new coordinates, ids/labels unchanged."""
        return LabeledPointCloud(self.ids, positions, self.labels, self.class_count)

    def subset(self, mask):
        """Cloud restricted to the samples selected by a boolean mask."""
        return LabeledPointCloud(self.ids[mask], self.positions[mask],
                                 self.labels[mask], self.class_count)
