"""Semi-discrete optimal transport from the uniform measure on a square to
the empirical measure on the translated latent samples, and the merging
relocation of every sample to its power-cell mass center.

Cell measures and centroids are estimated on a deterministic G x G grid of
cell centers; the height vector is optimized with Adam on the convex
transport energy, whose gradient is the measure mismatch w - nu.
"""

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from ._assign import assign_grid, assign_owners, site_order
from .cloud import LabeledPointCloud
from .errors import EmptyCellPersistent, FlipWarning, NoConvergence
from .mesh import delaunay_triangulate
from .plmap import PiecewiseLinearMap

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(16)
_QUAD_T = 0.5 * (_GAUSS_NODES + 1.0)
_QUAD_W = 0.5 * _GAUSS_WEIGHTS


@dataclass(frozen=True)
class SquareDomain:
    """Axis-aligned square carrying the uniform source measure."""

    ox: float
    oy: float
    side: float

    @property
    def corners(self):
        s = self.side
        return np.array([[self.ox, self.oy], [self.ox + s, self.oy],
                         [self.ox + s, self.oy + s], [self.ox, self.oy + s]])

    def contains(self, points, tol=0.0):
        p = np.atleast_2d(points)
        return ((p[:, 0] >= self.ox - tol) & (p[:, 0] <= self.ox + self.side + tol)
                & (p[:, 1] >= self.oy - tol) & (p[:, 1] <= self.oy + self.side + tol))


def bounding_domain(cloud: LabeledPointCloud, margin: float = 0.05) -> SquareDomain:
    """Smallest axis-aligned square containing the cloud, grown by
    ``margin`` per side, with a floor side length of 1."""
    lo = cloud.positions.min(axis=0)
    hi = cloud.positions.max(axis=0)
    extent = float((hi - lo).max())
    side = max(extent + 2.0 * margin, 1.0)
    center = 0.5 * (lo + hi)
    return SquareDomain(ox=float(center[0] - side / 2.0),
                        oy=float(center[1] - side / 2.0), side=side)


@dataclass(frozen=True)
class OtProblem:
    """Sites, target measures and the uniform square domain."""

    sites: np.ndarray
    target_measures: np.ndarray
    domain: SquareDomain
    site_ids: np.ndarray | None = None
    site_labels: np.ndarray | None = None

    def __post_init__(self):
        sites = np.ascontiguousarray(self.sites, dtype=np.float64)
        nu = np.ascontiguousarray(self.target_measures, dtype=np.float64)
        if len(sites) != len(nu):
            raise ValueError("one target measure required per site")
        if not np.isclose(nu.sum(), 1.0, atol=1e-9):
            raise ValueError("target measures must sum to 1")
        if (nu <= 0).any():
            raise ValueError("target measures must be positive")
        if len(np.unique(sites.view([('x', float), ('y', float)]))) != len(sites):
            raise ValueError("sites must be distinct")
        sites.setflags(write=False)
        nu.setflags(write=False)
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "target_measures", nu)

    @property
    def n(self):
        return len(self.sites)


def problem_from_cloud(cloud: LabeledPointCloud, margin: float = 0.05,
                       domain: SquareDomain | None = None) -> OtProblem:
    """Uniform 1/n target measure on the cloud positions."""
    n = len(cloud)
    return OtProblem(sites=cloud.positions,
                     target_measures=np.full(n, 1.0 / n),
                     domain=domain or bounding_domain(cloud, margin),
                     site_ids=cloud.ids, site_labels=cloud.labels)


@dataclass(frozen=True)
class PowerDiagramState:
    """Heights, grid-estimated cell measures and centroids of one power
    diagram over the problem domain.

    ``heights`` sum to zero and are expressed in domain-normalized units
    (the optimization runs on the unit square; multiply by ``side**2`` for
    original-unit heights)."""

    problem: OtProblem
    heights: np.ndarray
    cell_measures: np.ndarray
    centroids: np.ndarray
    grid_resolution: int
    empty_cells: np.ndarray
    converged: bool = False
    steps: int = 0
    energy: float = np.nan
    report: tuple = field(default_factory=tuple)

    @property
    def heights_original(self):
        return self.heights * self.problem.domain.side ** 2

    @property
    def max_measure_error(self):
        return float(np.abs(self.cell_measures - self.problem.target_measures).max())


def _normalized_sites(problem):
    """Sites mapped to the unit square; assignment is exactly equivariant
    under this similarity, so heights are kept in normalized units (the
    original-unit height vector is ``heights * side**2``)."""
    d = problem.domain
    px = np.ascontiguousarray((problem.sites[:, 0] - d.ox) / d.side)
    py = np.ascontiguousarray((problem.sites[:, 1] - d.oy) / d.side)
    return px, py


def estimate_measures(problem: OtProblem, heights, G: int):
    """Grid-sampled cell measures and mass centers at the given heights
    (normalized units, see :func:`_normalized_sites`).

    Empty cells get measure 0 and their own site as centroid; the returned
    mask flags them.
    """
    if G < 64:
        raise ValueError("grid resolution must be at least 64")
    h = np.ascontiguousarray(heights, dtype=np.float64)
    px, py = _normalized_sites(problem)
    order = site_order(px)
    counts, sx, sy = assign_grid(px, py, h, order, 0.0, 0.0, 1.0, G, True)
    w = counts / float(G) ** 2
    empty = counts == 0
    m = np.array(problem.sites)
    d = problem.domain
    nz = ~empty
    m[nz, 0] = d.ox + d.side * (sx[nz] / counts[nz])
    m[nz, 1] = d.oy + d.side * (sy[nz] / counts[nz])
    return w, m, empty


def _measures_only(problem, h, G):
    px, py = _normalized_sites(problem)
    order = site_order(px)
    counts, _, _ = assign_grid(px, py, h, order, 0.0, 0.0, 1.0, G, False)
    return counts / float(G) ** 2


def _revive_empty(problem, h, empty, G):
    """Raise each empty cell's height just enough to win the grid center
    nearest its site (plus half a grid-cell margin).

    Adam steps at a fixed rate overshoot the per-cell height scale inside
    dense clusters, which starves cells; the closed-form bump reclaims one
    grid center with minimal disturbance and the gradient regrows the cell.
    """
    px, py = _normalized_sites(problem)
    kappa = 0.5 / G ** 2
    h = h.copy()
    for i in np.where(empty)[0]:
        kx = min(max(int(px[i] * G), 0), G - 1)
        ky = min(max(int(py[i] * G), 0), G - 1)
        x = (kx + 0.5) / G
        y = (ky + 0.5) / G
        d2 = (x - px) ** 2 + (y - py) ** 2 - h
        winner = float(d2.min())
        own = (x - px[i]) ** 2 + (y - py[i]) ** 2
        h[i] = max(h[i], own - winner + kappa)
    return h - h.mean()


def transport_energy(problem: OtProblem, heights, G: int) -> float:
    """Convex transport energy: the measure integral along the straight
    height path from 0, by 16-point Gauss quadrature, minus h . nu."""
    h = np.asarray(heights, dtype=np.float64)
    acc = 0.0
    for t, wq in zip(_QUAD_T, _QUAD_W):
        w = _measures_only(problem, t * h, G)
        acc += wq * float(w @ h)
    return acc - float(h @ problem.target_measures)


def _grid_hessian(problem, h, G):
    """Sparse energy Hessian estimated from the owner grid: the measure
    derivative dw_a/dh_b is -L_ab / (2 |p_a - p_b|) for shared boundary
    length L_ab (domain walls contribute nothing)."""
    px, py = _normalized_sites(problem)
    order = site_order(px)
    owners = assign_owners(px, py, np.ascontiguousarray(h, dtype=np.float64),
                           order, 0.0, 0.0, 1.0, G)
    n = problem.n
    a = np.concatenate([owners[:, :-1].ravel(), owners[:-1, :].ravel()])
    b = np.concatenate([owners[:, 1:].ravel(), owners[1:, :].ravel()])
    mask = a != b
    if not mask.any():
        return None
    lo = np.minimum(a[mask], b[mask]).astype(np.int64)
    hi = np.maximum(a[mask], b[mask]).astype(np.int64)
    codes, counts = np.unique(lo * n + hi, return_counts=True)
    i = codes // n
    j = codes % n
    d = np.hypot(px[i] - px[j], py[i] - py[j])
    wgt = counts * (1.0 / G) / (2.0 * d)
    return sparse.coo_matrix(
        (np.concatenate([-wgt, -wgt, wgt, wgt]),
         (np.concatenate([i, j, i, j]), np.concatenate([j, i, i, j]))),
        shape=(n, n)).tocsr()


def _newton_direction(problem, h, grad, G):
    """Damped-Newton search direction on the zero-mean height subspace."""
    H = _grid_hessian(problem, h, G)
    if H is None:
        return None
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            delta_rest = spsolve(H[1:, 1:].tocsc(), -grad[1:])
    except Exception:
        return None
    if not np.all(np.isfinite(delta_rest)):
        return None
    delta = np.concatenate([[0.0], delta_rest])
    return delta - delta.mean()


@dataclass(frozen=True)
class OtConfig:
    grid: int = 512
    learning_rate: float = 0.05
    max_steps: int = 5000
    tolerance: float | None = None      # default 0.05 * min(nu)
    beta1: float = 0.9
    beta2: float = 0.999
    stall_window: int = 200
    densify: bool = False
    max_densify_rounds: int = 3
    # Adam's step magnitude is scale-free, so a fixed rate oscillates at
    # the ~lr level; halving on a measure-error plateau reaches grid-level
    # accuracy
    lr_patience: int = 40
    lr_decay: float = 0.5
    min_learning_rate: float = 1e-7


def solve_ot(problem: OtProblem, config: OtConfig = OtConfig()):
    """Minimize the transport energy until the grid measures match the
    targets within tolerance.

    Returns a converged :class:`PowerDiagramState`; raises ``NoConvergence``
    (best state attached) when the step budget runs out and
    ``EmptyCellPersistent`` when a cell stays empty for a full stall window
    and densification is disabled.
    """
    eps = config.tolerance
    if eps is None:
        eps = 0.05 * float(problem.target_measures.min())
    G = config.grid
    work = problem
    h = np.zeros(work.n)
    m1 = np.zeros(work.n)
    m2 = np.zeros(work.n)
    report = []
    best = None
    best_err = np.inf
    plateau = 0
    lr = config.learning_rate
    empty_streak = np.zeros(work.n, dtype=np.int64)
    densify_rounds = 0
    step = 0
    adam_t = 0
    while step <= config.max_steps:
        w, m, empty = estimate_measures(work, h, G)
        energy = transport_energy(work, h, G)
        err = float(np.abs(w - work.target_measures).max())
        report.append((step, energy, err, int(empty.sum())))
        state = PowerDiagramState(problem=work, heights=h.copy(),
                                  cell_measures=w, centroids=m,
                                  grid_resolution=G, empty_cells=empty,
                                  steps=step, energy=energy)
        if best is None or energy < best.energy:
            best = state
        if err <= eps and not empty.any():
            return replace(state, converged=True, report=tuple(report))
        empty_streak = np.where(empty, empty_streak + 1, 0)
        if (empty_streak >= config.stall_window).any():
            stuck = np.where(empty_streak >= config.stall_window)[0]
            if not config.densify or densify_rounds >= config.max_densify_rounds:
                raise EmptyCellPersistent(
                    f"cells {stuck.tolist()} stayed empty for "
                    f"{config.stall_window} steps")
            work, h = _densify(work, h, stuck)
            m1 = np.zeros(work.n)
            m2 = np.zeros(work.n)
            empty_streak = np.zeros(work.n, dtype=np.int64)
            adam_t = 0
            lr = config.learning_rate
            best_err = np.inf
            plateau = 0
            densify_rounds += 1
            step += 1
            continue
        if err < best_err - 1e-15:
            best_err = err
            plateau = 0
        else:
            plateau += 1
            if plateau >= config.lr_patience:
                lr = max(lr * config.lr_decay, config.min_learning_rate)
                plateau = 0
        grad = w - work.target_measures
        stepped = False
        if not empty.any():
            # all cells alive: a damped Newton step refines far faster than
            # Adam's scale-free updates
            delta = _newton_direction(work, h, grad, G)
            if delta is not None:
                alpha = 1.0
                while alpha >= 2.0 ** -10:
                    trial = h + alpha * delta
                    trial = trial - trial.mean()
                    w_t = _measures_only(work, trial, G)
                    err_t = float(np.abs(w_t - work.target_measures).max())
                    if err_t <= err * (1.0 - 0.1 * alpha) and (w_t > 0).all():
                        h = trial
                        stepped = True
                        m1 = np.zeros(work.n)
                        m2 = np.zeros(work.n)
                        adam_t = 0
                        break
                    alpha *= 0.5
        if not stepped:
            if empty.any():
                h = _revive_empty(work, h, empty, G)
            adam_t += 1
            m1 = config.beta1 * m1 + (1 - config.beta1) * grad
            m2 = config.beta2 * m2 + (1 - config.beta2) * grad * grad
            mhat = m1 / (1 - config.beta1 ** adam_t)
            vhat = m2 / (1 - config.beta2 ** adam_t)
            h = h - lr * mhat / (np.sqrt(vhat) + 1e-8)
            h = h - h.mean()
        step += 1
    raise NoConvergence(
        f"measure error {best.max_measure_error:.3e} > {eps:.3e} "
        f"after {config.max_steps} steps",
        best=replace(best, report=tuple(report)))


def _densify(problem, h, stuck):
    """Insert midpoints between each stuck empty-cell site and its nearest
    same-label site, redistributing the target measure uniformly."""
    sites = [problem.sites]
    labels = problem.site_labels
    ids = problem.site_ids
    new_sites = []
    new_labels = []
    next_id = int(ids.max()) + 1 if ids is not None else problem.n
    new_ids = []
    new_h = []
    for i in stuck:
        if labels is not None:
            same = np.where((labels == labels[i])
                            & (np.arange(problem.n) != i))[0]
        else:
            same = np.where(np.arange(problem.n) != i)[0]
        if len(same) == 0:
            continue
        d = np.linalg.norm(problem.sites[same] - problem.sites[i], axis=1)
        j = int(same[int(np.argmin(d))])
        mid = 0.5 * (problem.sites[i] + problem.sites[j])
        if (any(np.array_equal(mid, s) for s in new_sites)
                or (problem.sites == mid).all(axis=1).any()):
            continue
        new_sites.append(mid)
        new_labels.append(int(labels[i]) if labels is not None else 0)
        new_ids.append(next_id)
        next_id += 1
        new_h.append(0.5 * (h[i] + h[j]))
    if not new_sites:
        raise EmptyCellPersistent("densification found no insertion points")
    all_sites = np.vstack([problem.sites, np.array(new_sites)])
    n = len(all_sites)
    all_ids = (np.concatenate([ids, np.array(new_ids, dtype=np.int64)])
               if ids is not None else None)
    all_labels = (np.concatenate([labels, np.array(new_labels, dtype=np.int64)])
                  if labels is not None else None)
    new_problem = OtProblem(sites=all_sites,
                            target_measures=np.full(n, 1.0 / n),
                            domain=problem.domain,
                            site_ids=all_ids, site_labels=all_labels)
    h_out = np.concatenate([h, np.array(new_h)])
    h_out = h_out - h_out.mean()
    return new_problem, h_out


def merge_cloud(cloud: LabeledPointCloud, state: PowerDiagramState):
    """Relocate every sample to its power-cell mass center.

    Returns the merged cloud and the piecewise-linear relocation map whose
    source triangulation is the Delaunay mesh of the input positions. A
    ``FlipWarning`` is issued when relocation flips triangles (the map is
    still returned; only inverse evaluation is affected).
    """
    problem = state.problem
    if problem.site_ids is None:
        raise ValueError("state must carry site ids to merge a cloud")
    if state.empty_cells.any():
        raise ValueError("cannot merge from a state with empty cells")
    merged_cloud = LabeledPointCloud(
        ids=problem.site_ids, positions=state.centroids,
        labels=problem.site_labels, class_count=cloud.class_count)
    source_cloud = LabeledPointCloud(
        ids=problem.site_ids, positions=problem.sites,
        labels=problem.site_labels, class_count=cloud.class_count)
    source_mesh = delaunay_triangulate(source_cloud)
    relocation = PiecewiseLinearMap(source_mesh, state.centroids)
    if not relocation.orientation_preserving:
        warnings.warn(
            f"relocation flipped {relocation.flipped_count} triangles; "
            "inverse evaluation of the merge map is unreliable", FlipWarning,
            stacklevel=2)
    return merged_cloud, relocation
