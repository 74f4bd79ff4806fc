"""Benchmark harness: test functions, samplers, error metrics, drivers."""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import geometry as geo
from . import interp
from . import models
from .clustering import AnchorSelectionConfig
from .data import SampleSet, load_samples, save_samples  # noqa: F401 (re-export)
from .mean import MeanConvergenceError, MeanOptions


class BenchmarkError(Exception):
    pass


# -- test functions ---------------------------------------------------------

def spd_test_function(x, manifold=None):
    """Map [-1,1]^2 into 3x3 SPD matrices; diagonally dominant by construction."""
    x1, x2 = float(x[0]), float(x[1])
    M = np.array([
        [10.0 + 2.0 * math.sin(5.0 * x2), x2, x1 * x2],
        [x2, 10.0, x2 * x2],
        [x1 * x2, x2 * x2, 10.0],
    ])
    amp = abs(math.cos(2.0 * x2) + 0.6) * math.exp(-x1 * x1 - x2 * x2)
    man = manifold if manifold is not None else geo.spd(3)
    return geo.Point(man, 2.0 * np.eye(3) + amp * M)


def so3_skew_field(x):
    x1, x2 = float(x[0]), float(x[1])
    s = math.sin(4.0 * math.pi * (x1 * x1 + x2 * x2))
    return np.array([
        [0.0, x1 * x1 + 0.5 * x2, s],
        [-x1 * x1 - 0.5 * x2, 0.0, x1 + x2 * x2],
        [-s, -x1 - x2 * x2, 0.0],
    ])


def so3_test_function(x, manifold=None):
    """Rotation-valued test map: matrix exponential of a skew field."""
    man = manifold if manifold is not None else geo.special_orthogonal(3)
    return geo.Point(man, scipy.linalg.expm(so3_skew_field(x)))


def sphere_test_function(x, manifold=None):
    """Smooth map from [0,1]^2 to the unit 2-sphere spanning a wide band."""
    theta = 0.4 + 2.2 * float(x[0])
    phi = 0.8 + 2.4 * float(x[1])
    man = manifold if manifold is not None else geo.sphere(2)
    return geo.Point(man, np.array([
        math.sin(theta) * math.cos(phi),
        math.sin(theta) * math.sin(phi),
        math.cos(theta),
    ]))


_GRASS_N, _GRASS_R = 10, 3


def _grass_generator():
    rng = np.random.default_rng(20240517)
    A = rng.standard_normal((_GRASS_N, _GRASS_N))
    return 0.5 * (A - A.T)


_GRASS_A = _grass_generator()


def grassmann_test_function(x, manifold=None):
    """Subspace-valued test map: rotate a fixed 3-plane in R^10 by exp(t A)."""
    t = float(np.atleast_1d(x)[0])
    Q = scipy.linalg.expm(t * _GRASS_A)[:, :_GRASS_R]
    Qo, R = np.linalg.qr(Q)
    Qo = Qo * np.sign(np.where(np.diag(R) == 0, 1.0, np.diag(R)))
    man = manifold if manifold is not None else geo.grassmann(_GRASS_N, _GRASS_R)
    return geo.Point(man, Qo)


# -- samplers ---------------------------------------------------------------

def _radical_inverse(i, base):
    f, inv = 1.0, 0.0
    while i > 0:
        f /= base
        inv += f * (i % base)
        i //= base
    return inv


def halton2d(count):
    """First `count` Halton points in [0,1)^2, 1-based (no origin)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return np.array([[_radical_inverse(i, 2), _radical_inverse(i, 3)]
                     for i in range(1, count + 1)])


def _cheb_axis(k, lo, hi):
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return np.array([0.5 * (lo + hi)])
    t = np.cos(np.arange(k) * math.pi / (k - 1))  # second-kind points
    t = np.sort(t)
    return lo + (t + 1.0) * 0.5 * (hi - lo)


def _uniform_axis(k, lo, hi):
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return np.array([0.5 * (lo + hi)])
    return np.linspace(lo, hi, k)


def _tensor_product(axes):
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def chebyshev_grid(k, box):
    """Tensor grid of Chebyshev (second kind) points per axis."""
    axes = [_cheb_axis(k, lo, hi) for lo, hi in box]
    return _tensor_product(axes)


def uniform_grid(k, box):
    axes = [_uniform_axis(k, lo, hi) for lo, hi in box]
    return _tensor_product(axes)


# -- error metrics ----------------------------------------------------------

def rel_err_max(truths, preds):
    """(max, geometric mean, n_failed) of dist(f, fhat)/||f||_F per point.

    preds entries may be None for per-point evaluation failures; those
    are excluded from the statistics and counted.
    """
    errs = []
    failed = 0
    for t, p in zip(truths, preds):
        if p is None:
            failed += 1
            continue
        denom = float(np.linalg.norm(t.flat()))
        if denom == 0.0:
            raise BenchmarkError("zero Frobenius norm in relative error")
        errs.append(geo.dist(t, p) / denom)
    if not errs:
        return math.nan, math.nan, failed
    arr = np.array(errs)
    geomean = float(np.exp(np.mean(np.log(np.maximum(arr, 1e-300)))))
    return float(arr.max()), geomean, failed


# -- experiment driver ------------------------------------------------------

@dataclass
class BenchmarkConfig:
    which: str  # spd | so3 | sphere | grassmann
    train_sizes: list | None = None
    train_grid: int | None = None
    test_grid: int | None = None
    methods: tuple = ("stsm", "mtsm", "rmls")
    backend: str = "rbf"
    rbf_shape: float | None = None
    seed: int = 0
    L: float | None = None
    M: float | None = None
    rmax: int | None = None
    cutoff_c: float = 0.25
    rmls_delta: float | None = None
    out: str | None = None

    def __post_init__(self):
        if not self.methods:
            raise ValueError("method list must be nonempty")
        if self.which not in ("spd", "so3", "sphere", "grassmann"):
            raise ValueError("unknown benchmark %r" % self.which)
        if self.backend not in ("rbf", "multilinear"):
            raise ValueError("unknown backend %r" % self.backend)


@dataclass
class BenchRow:
    experiment: str
    method: str
    train_size: int
    R: int | None
    max_rel_err: float
    geomean_rel_err: float
    offline_s: float
    online_s: float
    status: str = "ok"
    message: str = ""


@dataclass
class ErrorReport:
    rows: list = field(default_factory=list)


_CSV_COLUMNS = ["experiment", "method", "train_size", "R", "max_rel_err",
                "geomean_rel_err", "offline_s", "online_s", "status", "message"]


def _experiment_setup(cfg):
    """Resolve manifold, truth function, training inputs, test inputs."""
    if cfg.which == "spd":
        L = cfg.L if cfg.L is not None else -4.0
        man = geo.spd(3, curvature_lower=L)
        f = lambda x: spd_test_function(x, man)
        box = [(-1.0, 1.0), (-1.0, 1.0)]
        if cfg.train_grid is not None:
            trains = [uniform_grid(cfg.train_grid, box)]
        else:
            sizes = cfg.train_sizes or [int(50 * 1.5 ** k) for k in range(6)]
            trains = [2.0 * halton2d(N) - 1.0 for N in sizes]
        test = uniform_grid(cfg.test_grid or 50, box)
        M = cfg.M if cfg.M is not None else 0.0
    elif cfg.which == "so3":
        L = cfg.L if cfg.L is not None else -1.0
        man = geo.special_orthogonal(3, curvature_lower=L)
        f = lambda x: so3_test_function(x, man)
        box = [(-0.5, 0.5), (-0.5, 0.5)]
        trains = [chebyshev_grid(cfg.train_grid or 7, box)]
        test = uniform_grid(cfg.test_grid or 20, box)
        M = cfg.M if cfg.M is not None else man.inj_estimate
    elif cfg.which == "sphere":
        L = cfg.L if cfg.L is not None else 0.0
        man = geo.sphere(2, curvature_lower=L)
        f = lambda x: sphere_test_function(x, man)
        box = [(0.0, 1.0), (0.0, 1.0)]
        trains = [uniform_grid(cfg.train_grid or 10, box)]
        test = uniform_grid(cfg.test_grid or 25, box)
        M = cfg.M if cfg.M is not None else man.inj_estimate
    else:  # grassmann
        L = cfg.L if cfg.L is not None else 0.0
        man = geo.grassmann(_GRASS_N, _GRASS_R, curvature_lower=L)
        f = lambda x: grassmann_test_function(x, man)
        box = [(0.0, 1.0)]
        trains = [uniform_grid(cfg.train_grid or 20, box)]
        test = uniform_grid(cfg.test_grid or 100, box)
        M = cfg.M if cfg.M is not None else man.inj_estimate
    return man, f, trains, test, M, L


def _backend_spec(cfg):
    if cfg.backend == "rbf":
        return interp.RbfBackend(shape=cfg.rbf_shape)
    return interp.MultilinearBackend()


def _eval_all(fn, test_inputs):
    preds = []
    for x in test_inputs:
        try:
            preds.append(fn(x))
        except (models.EmptySupportError, MeanConvergenceError,
                geo.ManifoldError):
            preds.append(None)
    return preds


def run_benchmark(cfg):
    """Run the configured experiment; returns an ErrorReport and writes CSV."""
    man, f, trains, test_inputs, M, L = _experiment_setup(cfg)
    backend = _backend_spec(cfg)
    truths = [f(x) for x in test_inputs]
    report = ErrorReport()

    for train_inputs in trains:
        N = train_inputs.shape[0]
        samples = SampleSet(inputs=train_inputs,
                            outputs=[f(x) for x in train_inputs],
                            provenance="%s benchmark" % cfg.which)
        for method in cfg.methods:
            row = BenchRow(experiment=cfg.which, method=method, train_size=N,
                           R=None, max_rel_err=math.nan,
                           geomean_rel_err=math.nan, offline_s=0.0,
                           online_s=0.0)
            try:
                if method == "stsm":
                    t0 = time.perf_counter()
                    sub = models.stsm_fit(samples, anchor="frechet",
                                          backend=backend)
                    row.offline_s = time.perf_counter() - t0
                    row.R = 1
                    t0 = time.perf_counter()
                    preds = _eval_all(lambda x: models.stsm_eval(sub, x),
                                      test_inputs)
                    row.online_s = time.perf_counter() - t0
                elif method == "mtsm":
                    rmax = cfg.rmax if cfg.rmax is not None else min(N - 1, 10)
                    acfg = AnchorSelectionConfig(R_max=rmax, M=M, L=L,
                                                 rng_seed=cfg.seed)
                    t0 = time.perf_counter()
                    model = models.mtsm_fit(samples, acfg, backend=backend,
                                            cutoff_c=cfg.cutoff_c)
                    row.offline_s = time.perf_counter() - t0
                    row.R = model.R
                    t0 = time.perf_counter()
                    preds = _eval_all(lambda x: models.mtsm_eval(model, x),
                                      test_inputs)
                    row.online_s = time.perf_counter() - t0
                elif method == "rmls":
                    delta = cfg.rmls_delta or models.default_rmls_radius(
                        samples.inputs)
                    rcfg = models.RmlsConfig(support_radius=delta)
                    t0 = time.perf_counter()
                    preds = _eval_all(
                        lambda x: models.rmls_eval(samples, x, rcfg),
                        test_inputs)
                    row.online_s = time.perf_counter() - t0
                else:
                    raise BenchmarkError("unknown method %r" % method)
                mx, gm, failed = rel_err_max(truths, preds)
                row.max_rel_err, row.geomean_rel_err = mx, gm
                if failed:
                    row.message = "%d test points failed evaluation" % failed
            except Exception as exc:  # a failed method must not stop the run
                row.status = "failed"
                row.message = "%s: %s" % (type(exc).__name__, exc)
            report.rows.append(row)

    if cfg.out:
        write_report_csv(report, cfg.out)
    return report


def write_report_csv(report, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_CSV_COLUMNS)
        for r in report.rows:
            writer.writerow([
                r.experiment, r.method, r.train_size,
                "" if r.R is None else r.R,
                "%.17g" % r.max_rel_err, "%.17g" % r.geomean_rel_err,
                "%.6f" % r.offline_s, "%.6f" % r.online_s,
                r.status, r.message,
            ])
