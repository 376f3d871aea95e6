"""Exception and warning types shared across the package."""


class GmapError(Exception):
    """Base class for all package errors."""


# -- geometry ---------------------------------------------------------------

class AllCollinear(GmapError):
    """Triangulation impossible: every input point lies on one line."""


class DuplicateAfterPerturbation(GmapError):
    """Deterministic perturbation failed to separate duplicate points."""


class RegionFragmentation(GmapError):
    """A class still occupies more than one connected region after island
    relabeling."""


class EmptyRegion(GmapError):
    """A class lost all of its triangles during relabeling."""


class NonInvertible(GmapError):
    """Inverse evaluation requested on a map with flipped triangles."""


# -- layout -----------------------------------------------------------------

class EmptyClass(GmapError):
    """A class index in range has no samples."""


class NoConvergence(GmapError):
    """Iteration budget exhausted before meeting the stopping criterion.

    Carries the best state reached so far in ``best`` when available.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class NoConsistentLayout(GmapError):
    """Layout adjustment failed to reproduce the target adjacency."""


class UnmappedLabel(GmapError):
    """Class correspondence is not a bijection over the labels present."""


# -- optimal transport ------------------------------------------------------

class EmptyCellPersistent(GmapError):
    """A power cell stayed empty for a full stall window."""


class FlipWarning(UserWarning):
    """Relocation produced flipped triangles; inverse evaluation of the
    returned map is unreliable."""


# -- harmonic systems -------------------------------------------------------

class SingularSystem(GmapError):
    """The constrained Laplacian system has no unique solution."""


class FlippedTriangles(GmapError):
    """A computed map is not orientation-preserving."""

    def __init__(self, count, message=None):
        super().__init__(message or f"{count} flipped triangles")
        self.count = count


class NonConvexFace(GmapError):
    """A straightened graph face is not convex."""

    def __init__(self, face_label, message=None):
        super().__init__(message or f"face for label {face_label} is not convex")
        self.face_label = face_label


class AmbiguousCorrespondence(GmapError):
    """Two chains share an identical signature; an explicit pairing is
    required."""


class NotIsomorphic(GmapError):
    """Feature graphs do not share the same region adjacency."""


class ConstraintViolation(GmapError):
    """A solved sliding vertex left its target segment."""


class StageMismatch(GmapError):
    """A pipeline stage cannot be evaluated in the requested direction."""
