"""Weighted Fréchet mean solver and the uniqueness-ball diagnostic."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo


class MeanConvergenceError(Exception):
    def __init__(self, message, last_iterate=None, grad_norm=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.grad_norm = grad_norm


class GeodesicDomainError(Exception):
    """Raised when some input point has no log at the current iterate."""


@dataclass(frozen=True)
class SimplexWeights:
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("weights must be a nonempty 1-D sequence")
        if np.any(arr < -1e-15) or np.any(arr > 1 + 1e-15):
            raise ValueError("weights must lie in [0, 1]")
        if abs(arr.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 within 1e-12")
        arr = np.clip(arr, 0.0, 1.0)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @classmethod
    def normalized(cls, raw):
        raw = np.asarray(raw, dtype=float)
        s = raw.sum()
        if s <= 0:
            raise ValueError("cannot normalize non-positive weights")
        return cls(raw / s)

    @classmethod
    def uniform(cls, d):
        return cls(np.full(d, 1.0 / d))


@dataclass(frozen=True)
class MeanOptions:
    grad_tol: float = 1e-10
    max_iters: int = 200
    step_rule: str = "backtracking"  # or "fixed"
    init: str = "weighted_argmax"  # or "first_point"

    def __post_init__(self):
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.step_rule not in ("fixed", "backtracking"):
            raise ValueError("unknown step rule %r" % self.step_rule)
        if self.init not in ("first_point", "weighted_argmax"):
            raise ValueError("unknown init rule %r" % self.init)


def _objective(p, points, weights):
    total = 0.0
    for y, w in zip(points, weights):
        d = geo.dist(p, y)
        if not math.isfinite(d):
            return math.inf
        total += w * d * d
    return total


def _gradient_direction(p, points, weights):
    # Negative Riemannian gradient of 1/2 * sum w_i dist(p, y_i)^2.
    acc = np.zeros(p.manifold.ambient_shape)
    for y, w in zip(points, weights):
        try:
            acc = acc + w * geo.log_map(p, y).coords
        except geo.LogUndefinedError as exc:
            raise GeodesicDomainError(
                "points not in a common geodesic domain") from exc
    return geo.TangentVector(p, acc)


def frechet_mean(points, weights, opts=None):
    """Weighted Fréchet mean by Riemannian gradient descent.

    The returned point certifies first-order stationarity:
    ||sum_i w_i Log_p(y_i)||_p <= opts.grad_tol.
    """
    opts = opts or MeanOptions()
    if isinstance(weights, SimplexWeights):
        wvals = weights.values
    else:
        wvals = SimplexWeights(np.asarray(weights, dtype=float)).values
    points = list(points)
    if not points:
        raise ValueError("need at least one point")
    if len(points) != len(wvals):
        raise ValueError("weights length does not match point count")
    man = points[0].manifold
    for y in points:
        if y.manifold != man:
            raise geo.DimensionMismatchError("points on different manifolds")

    # Zero-weight points never influence the result; drop them up front.
    keep = [i for i in range(len(points)) if wvals[i] > 0.0]
    pts = [points[i] for i in keep]
    w = wvals[keep]
    if len(pts) == 1:
        return pts[0]

    if opts.init == "first_point":
        p = pts[0]
    else:
        p = pts[int(np.argmax(w))]

    for _ in range(opts.max_iters):
        v = _gradient_direction(p, pts, w)
        gnorm = geo.norm(p, v)
        if gnorm <= opts.grad_tol:
            return p
        if opts.step_rule == "fixed":
            p = geo.exp_map(p, v)
            continue
        # Armijo backtracking on F(p) = sum w_i dist(p, y_i)^2 along v,
        # whose directional derivative at p is -2 ||v||_p^2.  Near the
        # minimum the required decrease drops below the floating-point
        # resolution of F; steps that keep F flat within that noise are
        # accepted so the iteration can still certify the gradient norm.
        f0 = _objective(p, pts, w)
        noise = 16.0 * np.finfo(float).eps * max(f0, 1.0)
        eta = 1.0
        accepted = False
        for _ in range(40):
            required = 1e-4 * eta * 2.0 * gnorm * gnorm
            cand = geo.exp_map(p, geo.TangentVector(p, eta * v.coords))
            fc = _objective(cand, pts, w)
            if fc <= f0 - required or (required <= noise and fc <= f0 + noise):
                p = cand
                accepted = True
                break
            eta *= 0.5
        if not accepted:
            raise MeanConvergenceError(
                "line search stalled at gradient norm %.3e" % gnorm,
                last_iterate=p, grad_norm=gnorm)

    v = _gradient_direction(p, pts, w)
    gnorm = geo.norm(p, v)
    if gnorm <= opts.grad_tol:
        return p
    raise MeanConvergenceError(
        "no convergence after %d iterations (gradient norm %.3e)"
        % (opts.max_iters, gnorm), last_iterate=p, grad_norm=gnorm)


@dataclass(frozen=True)
class UniquenessReport:
    ok: bool
    threshold: float
    max_dist: float
    slack: float


def uniqueness_radius_ok(points, center, K, inj):
    """Check the sufficient uniqueness condition for the Fréchet mean.

    True iff all points lie within distance (1/2) min{inj, pi/sqrt(K)}
    of the center (pi/sqrt(K) is +inf for K = 0).
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    if inj <= 0:
        raise ValueError("inj must be > 0")
    curv_cap = math.inf if K == 0 else math.pi / math.sqrt(K)
    threshold = 0.5 * min(inj, curv_cap)
    max_dist = 0.0
    for y in points:
        max_dist = max(max_dist, geo.dist(center, y))
    ok = max_dist <= threshold
    slack = threshold - max_dist
    return UniquenessReport(ok=ok, threshold=threshold,
                            max_dist=max_dist, slack=slack)
