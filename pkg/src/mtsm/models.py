"""Approximation schemes: single/multiple tangent-space models and the
moving-least-squares baseline, plus weight functions and diagnostics."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from . import interp
from .clustering import (AnchorSelectionConfig, coverage_stat_d_star,
                         riemannian_kmeans, select_anchors)
from .data import SampleSet
from .mean import MeanOptions, SimplexWeights, frechet_mean


class ModelError(Exception):
    pass


class AnchorSelectionError(ModelError):
    pass


class LocalityError(ModelError):
    """Some outputs have no logarithm at the chosen anchor."""

    def __init__(self, message, indices):
        super().__init__(message)
        self.indices = indices


class EmptySupportError(ModelError):
    pass


class ModelFormatError(ModelError):
    pass


class ModelVersionError(ModelFormatError):
    pass


def wendland(d):
    """Compactly supported C^2 kernel (1-d)_+^4 (4d+1)."""
    if d < 0:
        raise ValueError("d must be >= 0")
    t = 1.0 - d
    if t <= 0.0:
        return 0.0
    return t ** 4 * (4.0 * d + 1.0)


def cutoff_h(dsq, sigma_sq, c):
    """Smooth cutoff in squared distance: 1 on [0, c*sigma^2], 0 beyond sigma^2.

    h = a / (a + b) with a = e^{-1/(sigma^2 - d)_+}, b = e^{-1/(d - c sigma^2)_+}
    and the convention e^{-1/0} = 0.
    """
    if dsq < 0 or sigma_sq <= 0 or not 0.0 < c < 1.0:
        raise ValueError("invalid cutoff arguments")
    ra = sigma_sq - dsq
    rb = dsq - c * sigma_sq
    a = math.exp(-1.0 / ra) if ra > 0 else 0.0
    b = math.exp(-1.0 / rb) if rb > 0 else 0.0
    if a == 0.0:
        return 0.0
    return a / (a + b)


def tangent_frame(p):
    """Deterministic orthonormal basis of T_p M under the metric at p.

    Gram-Schmidt over the canonical ambient basis, lowest index first.
    Returns an array of shape (intrinsic_dim, *ambient_shape).
    """
    man = p.manifold
    frame = []
    for idx in range(man.ambient_dim):
        e = np.zeros(man.ambient_dim)
        e[idx] = 1.0
        v = geo.project_to_tangent(p, e.reshape(man.ambient_shape))
        w = v.coords.copy()
        for b in frame:
            w = w - geo.inner(p, geo.TangentVector(p, b),
                              geo.TangentVector(p, w)) * b
        nw = math.sqrt(max(geo.inner(p, geo.TangentVector(p, w),
                                     geo.TangentVector(p, w)), 0.0))
        if nw > 1e-8:
            frame.append(w / nw)
        if len(frame) == man.intrinsic_dim:
            break
    if len(frame) != man.intrinsic_dim:
        raise ModelError("could not build a full tangent frame")
    return np.array(frame)


def flatten_tangent(p, frame, v):
    return np.array([geo.inner(p, geo.TangentVector(p, b), v) for b in frame])


def unflatten_tangent(p, frame, coords):
    w = np.tensordot(np.asarray(coords, dtype=float), frame, axes=1)
    return geo.TangentVector(p, w)


@dataclass
class AnchorSubmodel:
    anchor: geo.Point
    sigma: float
    tau: float
    ghat: interp.VectorInterpolant
    frame: np.ndarray = field(repr=False)
    fit_indices: list = field(default_factory=list)
    excluded_indices: list = field(default_factory=list)


@dataclass
class MtsmModel:
    manifold: geo.ManifoldDescriptor
    submodels: list
    cutoff_c: float = 0.25
    mean_opts: MeanOptions = field(default_factory=MeanOptions)

    def __post_init__(self):
        if not self.submodels:
            raise ValueError("need at least one submodel")
        if not 0.0 < self.cutoff_c < 1.0:
            raise ValueError("cutoff_c must lie in (0, 1)")

    @property
    def R(self):
        return len(self.submodels)


@dataclass(frozen=True)
class RmlsConfig:
    support_radius: float

    def __post_init__(self):
        if self.support_radius <= 0:
            raise ValueError("support_radius must be > 0")


def default_rmls_radius(inputs):
    # generic queries should see a handful of samples
    return 2.5 * interp.mean_nn_spacing(inputs)


SIGMA_FLOOR = 1e-8


def _resolve_anchor(samples, anchor):
    if isinstance(anchor, geo.Point):
        return anchor
    if anchor == "frechet":
        n = len(samples.outputs)
        return frechet_mean(samples.outputs, SimplexWeights.uniform(n))
    if isinstance(anchor, str) and anchor.startswith("random"):
        seed = 0
        if "(" in anchor:
            seed = int(anchor[anchor.index("(") + 1:anchor.index(")")])
        rng = np.random.default_rng(seed)
        return samples.outputs[int(rng.integers(len(samples.outputs)))]
    raise ValueError("anchor must be a Point, 'frechet', or 'random(seed)'")


def _pullback_logs(anchor, outputs):
    logs, failed = [], []
    for i, y in enumerate(outputs):
        try:
            logs.append(geo.log_map(anchor, y))
        except geo.LogUndefinedError:
            logs.append(None)
            failed.append(i)
    return logs, failed


def stsm_fit(samples, anchor="frechet", backend=None):
    """Fit a single tangent-space submodel.

    Pull all outputs back to the anchor's tangent space, fit the backend
    to the flattened tangent samples, and record the data radius sigma.
    """
    backend = backend if backend is not None else interp.RbfBackend()
    p = _resolve_anchor(samples, anchor)
    logs, failed = _pullback_logs(p, samples.outputs)
    if failed:
        raise LocalityError(
            "no logarithm at the anchor for sample indices %s" % failed, failed)
    frame = tangent_frame(p)
    flat = np.array([flatten_tangent(p, frame, v) for v in logs])
    norms = np.linalg.norm(flat, axis=1)
    sigma = max(float(norms.max()), SIGMA_FLOOR)
    inj = p.manifold.inj_estimate
    cap = inj if inj > 0 else math.inf
    tau = min(cap, sigma * (1.0 + 1e-9))
    table = interp.TrainingTable(samples.inputs, flat)
    ghat = interp.fit_scattered(table, backend)
    return AnchorSubmodel(anchor=p, sigma=sigma, tau=tau, ghat=ghat,
                          frame=frame,
                          fit_indices=list(range(len(samples.outputs))))


def stsm_eval_ex(sub, x):
    """(point, out_of_domain_flag, squared tangent norm)."""
    coords, flag = sub.ghat.evaluate(x)
    v = unflatten_tangent(sub.anchor, sub.frame, coords)
    v = geo.project_to_tangent(sub.anchor, v.coords)
    q = geo.exp_map(sub.anchor, v)
    return q, flag, float(np.dot(coords, coords))


def stsm_eval(sub, x):
    return stsm_eval_ex(sub, x)[0]


def mtsm_weights(model, tangent_values):
    """Partition-of-unity weights from per-submodel tangent predictions.

    tangent_values is a sequence of (coords, out_of_domain_flag); flagged
    entries get weight 0.  Returns (weights, active_indices); an empty
    active set is a value the caller resolves.
    """
    h = np.zeros(model.R)
    for j, (coords, flag) in enumerate(tangent_values):
        if flag:
            continue
        dsq = float(np.dot(coords, coords))
        h[j] = cutoff_h(dsq, model.submodels[j].sigma ** 2, model.cutoff_c)
    total = h.sum()
    if total == 0.0:
        return np.zeros(model.R), []
    w = h / total
    active = [j for j in range(model.R) if w[j] > 0.0]
    return w, active


def mtsm_fit(samples, anchor_cfg, backend=None, cutoff_c=0.25,
             tau_factor=1.5, mean_opts=None, force_R=None):
    """Fit a multi-anchor model: select anchors, then fit one tangent-space
    interpolant per anchor from every sample whose pullback stays within
    that anchor's support radius."""
    backend = backend if backend is not None else interp.RbfBackend()
    mean_opts = mean_opts or MeanOptions()
    outputs = samples.outputs
    if force_R is not None:
        clus = riemannian_kmeans(outputs, force_R, anchor_cfg)
        clus.d_star = coverage_stat_d_star(outputs, clus.centers)
    else:
        clus = select_anchors(outputs, anchor_cfg)
        if clus is None:
            raise AnchorSelectionError(
                "no anchor count up to R_max=%d gives a covering clustering"
                % anchor_cfg.R_max)

    man = samples.manifold
    inj = man.inj_estimate if man.inj_estimate > 0 else math.inf
    submodels = []
    for j, center in enumerate(clus.centers):
        sigma_cluster = float(clus.radii[j])
        if not math.isfinite(sigma_cluster):
            raise AnchorSelectionError(
                "cluster %d contains samples outside its anchor's "
                "injectivity domain" % j)
        tau = min(inj, tau_factor * max(sigma_cluster, SIGMA_FLOOR))
        frame = tangent_frame(center)
        logs, _ = _pullback_logs(center, outputs)
        fit_idx, rows = [], []
        for i, v in enumerate(logs):
            if v is None:
                continue
            if geo.norm(center, v) <= tau:
                fit_idx.append(i)
                rows.append(flatten_tangent(center, frame, v))
        excluded = [i for i in range(len(outputs)) if i not in set(fit_idx)]
        if not fit_idx:
            raise ModelError("cluster %d has an empty fitting set" % j)
        flat = np.array(rows)
        sigma = max(float(np.linalg.norm(flat, axis=1).max()), SIGMA_FLOOR)
        tau = max(tau, sigma)
        try:
            table = interp.TrainingTable(samples.inputs[fit_idx], flat)
            ghat = interp.fit_scattered(table, backend)
        except (ValueError, interp.InterpolationError) as exc:
            raise ModelError(
                "cluster %d fitting set does not meet the backend's "
                "requirements: %s" % (j, exc)) from exc
        submodels.append(AnchorSubmodel(
            anchor=center, sigma=sigma, tau=tau, ghat=ghat, frame=frame,
            fit_indices=fit_idx, excluded_indices=excluded))
    return MtsmModel(manifold=man, submodels=submodels, cutoff_c=cutoff_c,
                     mean_opts=mean_opts)


def mtsm_eval(model, x):
    """Blend the submodel predictions with a weighted Fréchet mean.

    A single-submodel model reduces exactly to its underlying submodel
    (its weight is taken to be identically 1).
    """
    if model.R == 1:
        return stsm_eval(model.submodels[0], x)
    tangent_values = [sub.ghat.evaluate(x) for sub in model.submodels]
    w, active = mtsm_weights(model, tangent_values)
    if not active:
        raise EmptySupportError("query outside model support at %s"
                                % np.asarray(x).tolist())
    if len(active) == 1:
        j = active[0]
        sub = model.submodels[j]
        v = unflatten_tangent(sub.anchor, sub.frame, tangent_values[j][0])
        v = geo.project_to_tangent(sub.anchor, v.coords)
        return geo.exp_map(sub.anchor, v)
    qs, ws = [], []
    for j in active:
        sub = model.submodels[j]
        v = unflatten_tangent(sub.anchor, sub.frame, tangent_values[j][0])
        v = geo.project_to_tangent(sub.anchor, v.coords)
        qs.append(geo.exp_map(sub.anchor, v))
        ws.append(w[j])
    return frechet_mean(qs, SimplexWeights.normalized(ws), model.mean_opts)


def rmls_eval(samples, x, cfg, mean_opts=None):
    """Moving-least-squares prediction: weighted Fréchet mean of the sample
    outputs with compactly supported input-space weights."""
    x = np.asarray(x, dtype=float).ravel()
    raw = np.array([wendland(np.linalg.norm(x - xi) / cfg.support_radius)
                    for xi in samples.inputs])
    nz = np.nonzero(raw > 0.0)[0]
    if nz.size == 0:
        raise EmptySupportError("x outside data support (no sample within "
                                "radius %g)" % cfg.support_radius)
    pts = [samples.outputs[i] for i in nz]
    if nz.size == 1:
        return pts[0]
    return frechet_mean(pts, SimplexWeights.normalized(raw[nz]),
                        mean_opts or MeanOptions())


@dataclass
class WellposednessReport:
    cover_ok: bool
    cover_violations: list
    range_ok: bool
    range_violations: list
    tangent_errors: list  # per-submodel max training error eps_j
    eps_threshold: float
    partition_residual: float

    def summary(self):
        lines = [
            "cover check (every output inside some anchor ball): %s"
            % ("ok" if self.cover_ok else "violated at %s" % self.cover_violations),
            "range check (||g_j|| <= tau_j on fitting sets): %s"
            % ("ok" if self.range_ok else "violated at %s" % self.range_violations),
            "training tangent errors per submodel: %s"
            % ["%.3e" % e for e in self.tangent_errors],
            "tangent error threshold: %.6e" % self.eps_threshold,
            "partition-of-unity residual on probes: %.3e" % self.partition_residual,
        ]
        return "\n".join(lines)


def validate_wellposedness(model, samples, probe_inputs=None):
    """Diagnostic checks of the blending assumptions; never mutates the model."""
    cover_violations = []
    for i, y in enumerate(samples.outputs):
        if not any(geo.dist(sub.anchor, y) <= sub.sigma + 1e-9
                   for sub in model.submodels):
            cover_violations.append(i)

    range_violations = []
    tangent_errors = []
    for j, sub in enumerate(model.submodels):
        worst = 0.0
        for i in sub.fit_indices:
            coords, _ = sub.ghat.evaluate(samples.inputs[i])
            nrm = float(np.linalg.norm(coords))
            if nrm > sub.tau + 1e-9:
                range_violations.append((j, i))
            ref = flatten_tangent(sub.anchor, sub.frame,
                                  geo.log_map(sub.anchor, samples.outputs[i]))
            worst = max(worst, float(np.linalg.norm(coords - ref)))
        tangent_errors.append(worst)

    man = model.manifold
    inj = man.inj_estimate if man.inj_estimate > 0 else math.inf
    curv = math.inf if man.curvature_upper == 0 else \
        math.pi / (2.0 * math.sqrt(man.curvature_upper))
    eps_threshold = 0.1 * min(inj, curv)

    probes = samples.inputs if probe_inputs is None else np.atleast_2d(probe_inputs)
    residual = 0.0
    for x in probes:
        tv = [sub.ghat.evaluate(x) for sub in model.submodels]
        w, active = mtsm_weights(model, tv)
        if active:
            residual = max(residual, abs(float(w.sum()) - 1.0))

    return WellposednessReport(
        cover_ok=not cover_violations, cover_violations=cover_violations,
        range_ok=not range_violations, range_violations=range_violations,
        tangent_errors=tangent_errors, eps_threshold=eps_threshold,
        partition_residual=residual)


# -- model persistence ------------------------------------------------------

_FMT = "%.17g"


def _fmt_row(values):
    return " ".join(_FMT % v for v in np.asarray(values, dtype=float).ravel())


def _serialize_backend(g, out):
    if isinstance(g, interp._RbfInterpolant):
        out.append("backend rbf_multiquadric %s %d %d %d" % (
            _FMT % g.shape, g.nodes.shape[0], g.input_dim, g.output_dim))
        out.append("box " + _fmt_row(g.box))
        for row in g.nodes:
            out.append("node " + _fmt_row(row))
        for row in g.coeffs:
            out.append("coef " + _fmt_row(row))
    elif isinstance(g, interp._GridInterpolant):
        out.append("backend %s %d %d %s" % (
            g.backend, g.input_dim, g.output_dim,
            " ".join(str(len(a)) for a in g.axes)))
        for a in g.axes:
            out.append("axis " + _fmt_row(a))
        for row in g.values.reshape(-1, g.output_dim):
            out.append("val " + _fmt_row(row))
    else:
        raise ModelFormatError("cannot serialize backend %r" % type(g))


def save_model(model, path):
    man = model.manifold
    lines = ["MTSM-MODEL v1 %s %s" % (man.kind,
                                      " ".join(str(p) for p in man.params))]
    lines.append("curvature %s %s %s" % (_FMT % man.curvature_lower,
                                         _FMT % man.curvature_upper,
                                         _FMT % man.inj_estimate))
    lines.append("cutoff_c " + _FMT % model.cutoff_c)
    mo = model.mean_opts
    lines.append("mean_opts %s %d %s %s" % (_FMT % mo.grad_tol, mo.max_iters,
                                            mo.step_rule, mo.init))
    lines.append("submodels %d" % model.R)
    for j, sub in enumerate(model.submodels):
        lines.append("submodel %d" % j)
        lines.append("anchor " + _fmt_row(sub.anchor.coords))
        lines.append("sigma " + _FMT % sub.sigma)
        lines.append("tau " + _FMT % sub.tau)
        lines.append("frame %d" % sub.frame.shape[0])
        for b in sub.frame:
            lines.append("fvec " + _fmt_row(b))
        _serialize_backend(sub.ghat, lines)
    body = "\n".join(lines) + "\n"
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(body)
        fh.write("checksum %s\n" % digest)


class _LineReader:
    def __init__(self, lines):
        self.lines = lines
        self.pos = 0

    def next(self, expect=None):
        if self.pos >= len(self.lines):
            raise ModelFormatError("unexpected end of model file")
        line = self.lines[self.pos]
        self.pos += 1
        if expect is not None and not line.startswith(expect + " "):
            raise ModelFormatError("expected %r, got %r" % (expect, line))
        return line


def _parse_backend(rd):
    head = rd.next("backend").split()
    kind = head[1]
    if kind == "rbf_multiquadric":
        shape = float(head[2])
        n_nodes, in_dim, out_dim = int(head[3]), int(head[4]), int(head[5])
        box = np.array([float(t) for t in rd.next("box").split()[1:]])
        box = box.reshape(in_dim, 2)
        nodes = np.array([[float(t) for t in rd.next("node").split()[1:]]
                          for _ in range(n_nodes)]).reshape(n_nodes, in_dim)
        coeffs = np.array([[float(t) for t in rd.next("coef").split()[1:]]
                           for _ in range(n_nodes)]).reshape(n_nodes, out_dim)
        return interp._RbfInterpolant(nodes, coeffs, shape, box)
    if kind in ("multilinear_grid", "piecewise_linear_1d"):
        in_dim, out_dim = int(head[2]), int(head[3])
        lens = [int(t) for t in head[4:4 + in_dim]]
        axes = [np.array([float(t) for t in rd.next("axis").split()[1:]])
                for _ in range(in_dim)]
        n_rows = int(np.prod(lens))
        vals = np.array([[float(t) for t in rd.next("val").split()[1:]]
                         for _ in range(n_rows)])
        values = vals.reshape(tuple(lens) + (out_dim,))
        return interp._GridInterpolant(axes, values, kind)
    raise ModelFormatError("unknown backend kind %r" % kind)


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    lines = [ln for ln in text.split("\n") if ln != ""]
    if not lines:
        raise ModelFormatError("empty model file")
    if not lines[-1].startswith("checksum "):
        raise ModelFormatError("missing checksum line")
    stored = lines[-1].split()[1]
    body = "\n".join(lines[:-1]) + "\n"
    if hashlib.sha256(body.encode("utf-8")).hexdigest() != stored:
        raise ModelFormatError("checksum mismatch")

    head = lines[0].split()
    if len(head) < 3 or head[0] != "MTSM-MODEL":
        raise ModelFormatError("not a model file")
    if head[1] != "v1":
        raise ModelVersionError("unsupported model version %r" % head[1])
    kind = head[2]
    params = [int(t) for t in head[3:]]

    rd = _LineReader(lines[1:-1])
    L, K, M = (float(t) for t in rd.next("curvature").split()[1:])
    man = geo.descriptor_from_label(
        "%s:%s" % (kind, ",".join(str(p) for p in params)),
        curvature_lower=L, curvature_upper=K, inj_estimate=M)
    cutoff_c = float(rd.next("cutoff_c").split()[1])
    mo = rd.next("mean_opts").split()
    mean_opts = MeanOptions(grad_tol=float(mo[1]), max_iters=int(mo[2]),
                            step_rule=mo[3], init=mo[4])
    n_sub = int(rd.next("submodels").split()[1])
    submodels = []
    for _ in range(n_sub):
        rd.next("submodel")
        anchor = np.array([float(t) for t in rd.next("anchor").split()[1:]])
        anchor = geo.Point(man, anchor.reshape(man.ambient_shape))
        sigma = float(rd.next("sigma").split()[1])
        tau = float(rd.next("tau").split()[1])
        n_frame = int(rd.next("frame").split()[1])
        frame = np.array([[float(t) for t in rd.next("fvec").split()[1:]]
                          for _ in range(n_frame)])
        frame = frame.reshape((n_frame,) + man.ambient_shape)
        ghat = _parse_backend(rd)
        submodels.append(AnchorSubmodel(anchor=anchor, sigma=sigma, tau=tau,
                                        ghat=ghat, frame=frame))
    return MtsmModel(manifold=man, submodels=submodels, cutoff_c=cutoff_c,
                     mean_opts=mean_opts)
