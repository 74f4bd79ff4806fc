"""Riemannian geometry kernels for the supported matrix manifolds.

Points and tangent vectors are stored in ambient coordinates: vectors for
Euclidean space and the sphere, square matrices for SPD and SO(n), and
orthonormal n-by-r representatives for the Grassmannian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import kernels


class ManifoldError(Exception):
    pass


class DimensionMismatchError(ManifoldError):
    pass


class InvalidPointError(ManifoldError):
    pass


class LogUndefinedError(ManifoldError):
    """The target lies outside the injectivity domain of the base point."""


@dataclass(frozen=True)
class ManifoldDescriptor:
    kind: str
    params: tuple
    intrinsic_dim: int
    ambient_shape: tuple
    curvature_lower: float  # L <= 0
    curvature_upper: float  # K >= 0
    inj_estimate: float  # 0 means unknown, math.inf means no restriction

    def __post_init__(self):
        if self.curvature_lower > 0 or self.curvature_upper < 0:
            raise ValueError("curvature bounds must satisfy L <= 0 <= K")
        if self.inj_estimate < 0:
            raise ValueError("inj_estimate must be >= 0")

    @property
    def ambient_dim(self):
        return int(np.prod(self.ambient_shape))

    def label(self):
        return "%s:%s" % (self.kind, ",".join(str(p) for p in self.params))


def euclidean(m, curvature_lower=0.0, curvature_upper=0.0, inj_estimate=math.inf):
    return ManifoldDescriptor("euclidean", (m,), m, (m,),
                              curvature_lower, curvature_upper, inj_estimate)


def sphere(m, curvature_lower=0.0, curvature_upper=1.0, inj_estimate=math.pi):
    return ManifoldDescriptor("sphere", (m,), m, (m + 1,),
                              curvature_lower, curvature_upper, inj_estimate)


def spd(n, curvature_lower=0.0, curvature_upper=0.0, inj_estimate=math.inf):
    # The user is expected to supply a curvature lower bound for the data
    # region; the default 0 disables curvature-based thresholds.
    return ManifoldDescriptor("spd", (n,), n * (n + 1) // 2, (n, n),
                              curvature_lower, curvature_upper, inj_estimate)


def special_orthogonal(n, curvature_lower=0.0, curvature_upper=1.0,
                       inj_estimate=math.pi / 2):
    return ManifoldDescriptor("special_orthogonal", (n,), n * (n - 1) // 2,
                              (n, n), curvature_lower, curvature_upper,
                              inj_estimate)


def grassmann(n, r, curvature_lower=0.0, curvature_upper=1.0,
              inj_estimate=math.pi / 2):
    return ManifoldDescriptor("grassmann", (n, r), r * (n - r), (n, r),
                              curvature_lower, curvature_upper, inj_estimate)


_FACTORIES = {
    "euclidean": euclidean,
    "sphere": sphere,
    "spd": spd,
    "special_orthogonal": special_orthogonal,
    "grassmann": grassmann,
}


def descriptor_from_label(label, **kwargs):
    """Parse 'kind:p1,p2' labels, e.g. 'spd:3' or 'grassmann:6,2'."""
    kind, _, rest = label.partition(":")
    if kind not in _FACTORIES:
        raise ValueError("unknown manifold kind %r" % kind)
    params = [int(tok) for tok in rest.replace(" ", ",").split(",") if tok]
    return _FACTORIES[kind](*params, **kwargs)


@dataclass(frozen=True)
class Point:
    manifold: ManifoldDescriptor
    coords: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.coords, dtype=float)
        if arr.shape != self.manifold.ambient_shape:
            raise DimensionMismatchError(
                "coords shape %s does not match ambient shape %s"
                % (arr.shape, self.manifold.ambient_shape))
        arr.flags.writeable = False
        object.__setattr__(self, "coords", arr)

    def flat(self):
        return self.coords.ravel()


@dataclass(frozen=True)
class TangentVector:
    base: Point
    coords: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.coords, dtype=float)
        if arr.shape != self.base.manifold.ambient_shape:
            raise DimensionMismatchError(
                "tangent coords shape %s does not match ambient shape %s"
                % (arr.shape, self.base.manifold.ambient_shape))
        arr.flags.writeable = False
        object.__setattr__(self, "coords", arr)

    def flat(self):
        return self.coords.ravel()


def validate_point(p, tol=None):
    """Check the Point invariants of p's kind; raise InvalidPointError.

    tol overrides the per-kind residual tolerances (1e-12 for symmetry /
    unit norm, 1e-10 for orthonormality) with a single value.
    """
    kind = p.manifold.kind
    x = p.coords
    tight = 1e-12 if tol is None else tol
    ortho = 1e-10 if tol is None else tol
    if kind == "euclidean":
        if not np.all(np.isfinite(x)):
            raise InvalidPointError("non-finite coordinates")
    elif kind == "sphere":
        if abs(np.linalg.norm(x) - 1.0) > tight:
            raise InvalidPointError("sphere point is not unit length")
    elif kind == "spd":
        if np.linalg.norm(x - x.T) > tight:
            raise InvalidPointError("SPD point is not symmetric")
        if np.linalg.eigvalsh(0.5 * (x + x.T)).min() <= 0:
            raise InvalidPointError("SPD point is not positive definite")
    elif kind == "special_orthogonal":
        n = p.manifold.params[0]
        if np.linalg.norm(x.T @ x - np.eye(n)) > ortho:
            raise InvalidPointError("SO(n) point is not orthogonal")
        if np.linalg.det(x) <= 0:
            raise InvalidPointError("SO(n) point has non-positive determinant")
    elif kind == "grassmann":
        r = p.manifold.params[1]
        if np.linalg.norm(x.T @ x - np.eye(r)) > ortho:
            raise InvalidPointError("Grassmann representative is not orthonormal")
    else:
        raise ValueError("unknown kind %r" % kind)
    return p


def _check_same_manifold(p, q):
    if p.manifold != q.manifold:
        raise DimensionMismatchError("points live on different manifolds")


def _check_anchored(p, v):
    if v.base.manifold != p.manifold:
        raise DimensionMismatchError("tangent vector anchored on a different manifold")


def _skew(A):
    return 0.5 * (A - A.T)


def _so_log_raw(P, Q):
    A = P.T @ Q
    S = scipy.linalg.logm(A)
    S = np.real(S)
    if np.linalg.norm(S + S.T) > 1e-8:
        raise LogUndefinedError("rotation at or beyond the cut locus")
    return P @ _skew(S)


def _grass_exp_raw(P, V):
    U, s, Vt = np.linalg.svd(V, full_matrices=False)
    Q = (P @ Vt.T) * np.cos(s) + U * np.sin(s)
    Q = Q @ Vt
    # re-orthonormalize the representative; the subspace is unchanged
    Qo, R = np.linalg.qr(Q)
    Qo = Qo * np.sign(np.where(np.diag(R) == 0, 1.0, np.diag(R)))
    return Qo


def _grass_log_raw(P, Q):
    PtQ = P.T @ Q
    r = PtQ.shape[0]
    if abs(np.linalg.det(PtQ)) < 1e-12:
        raise LogUndefinedError("subspaces contain orthogonal directions")
    L = (Q - P @ (P.T @ Q)) @ np.linalg.inv(PtQ)
    U, s, Vt = np.linalg.svd(L, full_matrices=False)
    return (U * np.arctan(s)) @ Vt


def _grass_dist_raw(P, Q):
    # Principal angles from both their cosines and sines; arccos of a
    # near-unit cosine cannot resolve angles below sqrt(machine eps).
    c = np.linalg.svd(P.T @ Q, compute_uv=False)  # descending cosines
    s = np.linalg.svd(Q - P @ (P.T @ Q), compute_uv=False)  # descending sines
    c = np.clip(c, 0.0, 1.0)
    s = np.clip(s[::-1], 0.0, 1.0)  # ascending, pairs with descending cosines
    return float(np.linalg.norm(np.arctan2(s, c)))


def exp_map(p, v):
    """Geodesic endpoint Exp_p(v)."""
    _check_anchored(p, v)
    kind = p.manifold.kind
    x, w = p.coords, v.coords
    if kind == "euclidean":
        out = x + w
    elif kind == "sphere":
        out = kernels.sphere_exp(x, w)
    elif kind == "spd":
        try:
            out = kernels.spd_exp(x, w)
        except Exception as exc:
            raise InvalidPointError("SPD Cholesky failure: %s" % exc) from exc
    elif kind == "special_orthogonal":
        out = x @ scipy.linalg.expm(x.T @ w)
    elif kind == "grassmann":
        out = _grass_exp_raw(x, w)
    else:
        raise ValueError(kind)
    return Point(p.manifold, out)


def log_map(p, q):
    """Initial velocity Log_p(q) of the geodesic from p to q."""
    _check_same_manifold(p, q)
    kind = p.manifold.kind
    x, y = p.coords, q.coords
    if kind == "euclidean":
        out = y - x
    elif kind == "sphere":
        c = float(np.dot(x, y))
        if c <= -1.0 + 1e-14:
            raise LogUndefinedError("antipodal sphere points")
        out = kernels.sphere_log(x, y)
    elif kind == "spd":
        try:
            out = kernels.spd_log(x, y)
        except Exception as exc:
            raise InvalidPointError("SPD Cholesky failure: %s" % exc) from exc
    elif kind == "special_orthogonal":
        out = _so_log_raw(x, y)
    elif kind == "grassmann":
        out = _grass_log_raw(x, y)
    else:
        raise ValueError(kind)
    return TangentVector(p, out)


def dist(p, q):
    """Geodesic distance; math.inf when no geodesic/log is computable."""
    _check_same_manifold(p, q)
    kind = p.manifold.kind
    x, y = p.coords, q.coords
    if kind == "euclidean":
        return float(np.linalg.norm(y - x))
    if kind == "sphere":
        return float(kernels.sphere_dist(x, y))
    if kind == "spd":
        try:
            return float(kernels.spd_dist(x, y))
        except Exception:
            return math.inf
    if kind == "special_orthogonal":
        try:
            return float(np.linalg.norm(_so_log_raw(x, y)))
        except LogUndefinedError:
            return math.inf
    if kind == "grassmann":
        return _grass_dist_raw(x, y)
    raise ValueError(kind)


def inner(p, u, v):
    """Riemannian inner product g_p(u, v)."""
    _check_anchored(p, u)
    _check_anchored(p, v)
    if p.manifold.kind == "spd":
        return float(kernels.spd_inner(p.coords, u.coords, v.coords))
    return float(np.sum(u.coords * v.coords))


def norm(p, v):
    return math.sqrt(max(inner(p, v, v), 0.0))


def project_to_tangent(p, w):
    """Orthogonal projection of an ambient vector onto T_p M."""
    w = np.asarray(w, dtype=float)
    if w.shape != p.manifold.ambient_shape:
        raise DimensionMismatchError(
            "ambient vector shape %s does not match %s"
            % (w.shape, p.manifold.ambient_shape))
    kind = p.manifold.kind
    x = p.coords
    if kind == "euclidean":
        out = w
    elif kind == "sphere":
        out = w - np.dot(x, w) * x
    elif kind == "spd":
        out = 0.5 * (w + w.T)
    elif kind == "special_orthogonal":
        out = x @ _skew(x.T @ w)
    elif kind == "grassmann":
        out = w - x @ (x.T @ w)
    else:
        raise ValueError(kind)
    return TangentVector(p, out)


def zero_tangent(p):
    return TangentVector(p, np.zeros(p.manifold.ambient_shape))


def random_point(manifold, rng_seed):
    """Seeded random point satisfying the kind's invariants."""
    rng = np.random.default_rng(rng_seed)
    kind = manifold.kind
    if kind == "euclidean":
        return Point(manifold, rng.standard_normal(manifold.ambient_shape))
    if kind == "sphere":
        x = rng.standard_normal(manifold.ambient_shape)
        return Point(manifold, x / np.linalg.norm(x))
    if kind == "spd":
        n = manifold.params[0]
        A = rng.standard_normal((n, n))
        S = 0.5 * (A + A.T)
        S *= 0.5 / max(np.linalg.norm(S), 1e-12)
        w, U = np.linalg.eigh(S)
        return Point(manifold, (U * np.exp(w)) @ U.T)
    if kind == "special_orthogonal":
        n = manifold.params[0]
        Q, R = np.linalg.qr(rng.standard_normal((n, n)))
        Q = Q * np.sign(np.diag(R))
        if np.linalg.det(Q) < 0:
            Q[:, 0] = -Q[:, 0]
        return Point(manifold, Q)
    if kind == "grassmann":
        n, r = manifold.params
        Q, R = np.linalg.qr(rng.standard_normal((n, r)))
        Q = Q * np.sign(np.where(np.diag(R) == 0, 1.0, np.diag(R)))
        return Point(manifold, Q)
    raise ValueError(kind)


def random_tangent(p, norm_target, rng_seed):
    """Seeded random tangent vector with ||v||_p equal to norm_target."""
    if norm_target < 0:
        raise ValueError("norm must be >= 0")
    if norm_target == 0:
        return zero_tangent(p)
    rng = np.random.default_rng(rng_seed)
    w = rng.standard_normal(p.manifold.ambient_shape)
    v = project_to_tangent(p, w)
    nv = norm(p, v)
    if nv < 1e-12:
        raise ManifoldError("degenerate random tangent draw")
    return TangentVector(p, v.coords * (norm_target / nv))
