"""Riemannian k-means, covering statistics, and adaptive anchor selection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from . import geometry as geo
from .mean import MeanOptions, SimplexWeights, frechet_mean


@dataclass
class Clustering:
    centers: list
    assignment: np.ndarray
    radii: np.ndarray
    d_star: float = math.nan

    def cluster_indices(self, j):
        return np.nonzero(self.assignment == j)[0]


@dataclass(frozen=True)
class AnchorSelectionConfig:
    R_max: int
    M: float = 0.0  # injectivity-radius estimate, 0 = unknown
    L: float = 0.0  # curvature lower bound, <= 0
    kmeans_restarts: int = 5
    kmeans_max_iters: int = 100
    rng_seed: int = 0

    def __post_init__(self):
        if self.R_max < 1:
            raise ValueError("R_max must be >= 1")
        if self.L > 0:
            raise ValueError("L must be <= 0")
        if self.M < 0:
            raise ValueError("M must be >= 0")


def ddiam(points):
    """Discrete diameter: max pairwise distance over 0 < dist < inf."""
    pts = list(points)
    best = 0.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = geo.dist(pts[i], pts[j])
            if 0.0 < d < math.inf:
                best = max(best, d)
    return best


def _log_norm_or_inf(center, y, inj):
    # The log is used only strictly inside the injectivity estimate.
    if inj > 0 and math.isfinite(inj):
        if not geo.dist(center, y) < inj:
            return math.inf
    try:
        v = geo.log_map(center, y)
    except geo.LogUndefinedError:
        return math.inf
    return geo.norm(center, v)


def coverage_stat_d_star(points, centers):
    """max over samples of min over centers of ||Log_{center} y||.

    Finite output certifies a covering clustering: every sample lies in
    the injectivity domain of at least one center.
    """
    centers = list(centers)
    if not centers:
        raise ValueError("need at least one center")
    worst = 0.0
    for y in points:
        inj = y.manifold.inj_estimate
        best = math.inf
        for c in centers:
            best = min(best, _log_norm_or_inf(c, y, inj))
        worst = max(worst, best)
    return worst


def _assign(points, centers):
    assignment = np.empty(len(points), dtype=int)
    mindist = np.empty(len(points))
    for i, y in enumerate(points):
        dists = [geo.dist(c, y) for c in centers]
        j = int(np.argmin(dists))  # argmin breaks ties to the lowest index
        assignment[i] = j
        mindist[i] = dists[j]
    return assignment, mindist


def _farthest_point_seeds(points, R, rng):
    idx = [int(rng.integers(len(points)))]
    mind = np.array([geo.dist(points[idx[0]], y) for y in points])
    while len(idx) < R:
        nxt = int(np.argmax(mind))
        idx.append(nxt)
        dn = np.array([geo.dist(points[nxt], y) for y in points])
        mind = np.minimum(mind, dn)
    return idx


def riemannian_kmeans(points, R, config):
    """Hard k-means with geodesic distances and Fréchet-mean centers."""
    points = list(points)
    N = len(points)
    if not 1 <= R <= N:
        raise ValueError("need 1 <= R <= N")
    mean_opts = MeanOptions(grad_tol=1e-9, max_iters=200)

    best = None
    best_obj = math.inf
    for restart in range(config.kmeans_restarts):
        rng = np.random.default_rng((config.rng_seed, restart))
        centers = [points[i] for i in _farthest_point_seeds(points, R, rng)]
        assignment = None
        for _ in range(config.kmeans_max_iters):
            new_assignment, mindist = _assign(points, centers)
            # empty cluster: re-seed at the sample farthest from its center
            for j in range(R):
                if not np.any(new_assignment == j):
                    far = int(np.argmax(mindist))
                    centers[j] = points[far]
                    new_assignment[far] = j
                    mindist[far] = 0.0
            if assignment is not None and np.array_equal(assignment, new_assignment):
                break
            assignment = new_assignment
            for j in range(R):
                members = [points[i] for i in np.nonzero(assignment == j)[0]]
                centers[j] = frechet_mean(
                    members, SimplexWeights.uniform(len(members)), mean_opts)
        assignment, mindist = _assign(points, centers)
        obj = float(np.sum(mindist ** 2))
        if obj < best_obj:
            best_obj = obj
            best = (centers, assignment)

    centers, assignment = best
    radii = np.zeros(R)
    for j in range(R):
        for i in np.nonzero(assignment == j)[0]:
            radii[j] = max(radii[j], _log_norm_or_inf(
                centers[j], points[i], points[i].manifold.inj_estimate))
    return Clustering(centers=centers, assignment=assignment, radii=radii)


def initial_anchor_count(ddiam_value, M, L):
    """Lower end of the anchor-count scan, at least 1."""
    m_term = 1.0 / M if (M > 0 and math.isfinite(M)) else 0.0
    l_term = math.sqrt(abs(L)) / math.pi
    r = math.floor(0.5 * ddiam_value * max(m_term, l_term))
    return max(int(r), 1)


def select_anchors(points, config):
    """Scan R upward until the clustering covers tightly enough.

    Returns the first Clustering whose covering statistic is below
    pi/sqrt(|L|) (any covering clustering passes when L = 0), or None
    when no R in [R_min, R_max] succeeds.
    """
    points = list(points)
    if config.R_max >= len(points):
        raise ValueError("R_max must be < number of samples")
    r_min = initial_anchor_count(ddiam(points), config.M, config.L)
    if r_min > config.R_max:
        r_min = 1
    threshold = math.inf if config.L == 0 else math.pi / math.sqrt(abs(config.L))
    for R in range(r_min, config.R_max + 1):
        clus = riemannian_kmeans(points, R, config)
        d_star = coverage_stat_d_star(points, clus.centers)
        if d_star < threshold:
            clus.d_star = d_star
            return clus
    return None


def _model_ball_volume_integral(n, L, radius):
    if L == 0:
        def s(t):
            return t
    else:
        rt = math.sqrt(abs(L))

        def s(t):
            return math.sinh(rt * t) / rt
    val, _ = quad(lambda t: s(t) ** (n - 1), 0.0, radius, epsrel=1e-10, limit=200)
    return val


def gromov_upper_bound(intrinsic_dim, L, big_radius, small_radius):
    """Ratio of geodesic-ball volumes in the constant-curvature model space.

    Used as an upper bound on how many small balls cover a big one; the
    dimensional constant cancels in the ratio.
    """
    if L > 0:
        raise ValueError("L must be <= 0")
    if big_radius <= 0 or small_radius <= 0:
        raise ValueError("radii must be > 0")
    big = _model_ball_volume_integral(intrinsic_dim, L, big_radius)
    small = _model_ball_volume_integral(intrinsic_dim, L, small_radius)
    return big / small
