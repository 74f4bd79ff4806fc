"""Vector-valued interpolation backends for tangent-space fitting."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from . import kernels


class InterpolationError(Exception):
    pass


class IllConditionedKernelError(InterpolationError):
    pass


@dataclass(frozen=True)
class TrainingTable:
    inputs: np.ndarray = field(repr=False)  # (N, n)
    outputs: np.ndarray = field(repr=False)  # (N, m)

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        y = np.atleast_2d(np.asarray(self.outputs, dtype=float))
        if x.shape[0] != y.shape[0]:
            raise ValueError("inputs and outputs disagree on sample count")
        if x.shape[0] < 1:
            raise ValueError("need at least one sample")
        uniq = np.unique(x, axis=0)
        if uniq.shape[0] != x.shape[0]:
            raise ValueError("duplicate inputs are not allowed")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "outputs", y)


def mean_nn_spacing(inputs):
    """Mean nearest-neighbor distance of the input sites."""
    x = np.atleast_2d(np.asarray(inputs, dtype=float))
    if x.shape[0] < 2:
        return 1.0
    d2 = np.sum((x[:, None, :] - x[None, :, :]) ** 2, axis=-1)
    np.fill_diagonal(d2, np.inf)
    return float(np.mean(np.sqrt(d2.min(axis=1))))


# Backend specifications used by the model-fitting layer.

@dataclass(frozen=True)
class RbfBackend:
    shape: float | None = None  # None -> mean nearest-neighbor spacing


@dataclass(frozen=True)
class MultilinearBackend:
    pass


@dataclass(frozen=True)
class PiecewiseLinear1DBackend:
    pass


class VectorInterpolant:
    """Fitted interpolant mapping a box in R^n to R^m.

    evaluate(x) returns (value, out_of_domain); queries outside the box
    are clamped to it and flagged.
    """

    backend: str
    input_dim: int
    output_dim: int
    box: np.ndarray  # (n, 2)

    def _eval_inside(self, x):
        raise NotImplementedError

    def evaluate(self, x):
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.input_dim:
            raise ValueError("query has %d coordinates, expected %d"
                             % (x.size, self.input_dim))
        clamped = np.clip(x, self.box[:, 0], self.box[:, 1])
        flag = bool(np.any(clamped != x))
        return self._eval_inside(clamped), flag


class _RbfInterpolant(VectorInterpolant):
    backend = "rbf_multiquadric"

    def __init__(self, nodes, coeffs, shape, box):
        self.nodes = nodes
        self.coeffs = coeffs
        self.shape = shape
        self.box = box
        self.input_dim = nodes.shape[1]
        self.output_dim = coeffs.shape[1]

    def _eval_inside(self, x):
        return np.asarray(kernels.multiquadric_eval(
            x, self.nodes, self.coeffs, self.shape))


class _GridInterpolant(VectorInterpolant):
    def __init__(self, axes, values, backend):
        self.backend = backend
        self.axes = [np.asarray(a, dtype=float) for a in axes]
        self.values = np.asarray(values, dtype=float)
        self.input_dim = len(self.axes)
        self.output_dim = self.values.shape[-1]
        self.box = np.array([[a[0], a[-1]] for a in self.axes])
        if self.values.shape[:-1] != tuple(len(a) for a in self.axes):
            raise ValueError("values tensor does not match the axes")
        self._rgi = RegularGridInterpolator(
            self.axes, self.values, method="linear", bounds_error=True)

    def _eval_inside(self, x):
        return np.asarray(self._rgi(x[None, :])[0])


def fit_rbf(table, shape=None):
    """Multiquadric RBF interpolant sqrt(r^2 + shape^2), exact at nodes.

    One kernel system is solved for all output components.  The domain
    box is the input bounding box inflated by the shape parameter, so
    queries slightly outside the data hull still evaluate unflagged.
    """
    x, y = table.inputs, table.outputs
    if shape is None:
        shape = mean_nn_spacing(x)
    if shape <= 0:
        raise ValueError("shape parameter must be > 0")
    diff = x[:, None, :] - x[None, :, :]
    K = np.sqrt(np.sum(diff * diff, axis=-1) + shape * shape)
    cond = np.linalg.cond(K)
    if cond > 1e14:
        raise IllConditionedKernelError(
            "kernel matrix condition %.2e exceeds 1e14; "
            "try a different shape parameter" % cond)
    coeffs = np.linalg.solve(K, y)
    lo = x.min(axis=0) - shape
    hi = x.max(axis=0) + shape
    box = np.stack([lo, hi], axis=1)
    return _RbfInterpolant(np.ascontiguousarray(x),
                           np.ascontiguousarray(coeffs),
                           float(shape), box)


def fit_multilinear_grid(axes, values):
    """Component-wise multilinear interpolation on a full tensor grid."""
    for a in axes:
        a = np.asarray(a, dtype=float)
        if a.ndim != 1 or len(a) < 1 or np.any(np.diff(a) <= 0):
            raise ValueError("axes must be strictly increasing 1-D knots")
    return _GridInterpolant(axes, values, "multilinear_grid")


def fit_piecewise_linear_1d(table):
    order = np.argsort(table.inputs[:, 0])
    knots = table.inputs[order, 0]
    if np.any(np.diff(knots) <= 0):
        raise ValueError("1-D knots must be distinct")
    return _GridInterpolant([knots], table.outputs[order], "piecewise_linear_1d")


def fit_scattered(table, spec):
    """Fit the backend described by spec to a scattered training table.

    The grid backends require the inputs to form a full tensor grid.
    """
    if isinstance(spec, RbfBackend):
        return fit_rbf(table, spec.shape)
    if isinstance(spec, PiecewiseLinear1DBackend):
        if table.inputs.shape[1] != 1:
            raise ValueError("piecewise_linear_1d needs 1-D inputs")
        return fit_piecewise_linear_1d(table)
    if isinstance(spec, MultilinearBackend):
        axes = [np.unique(table.inputs[:, k])
                for k in range(table.inputs.shape[1])]
        total = int(np.prod([len(a) for a in axes]))
        if total != table.inputs.shape[0]:
            raise InterpolationError(
                "multilinear backend needs a full tensor grid "
                "(%d sites, grid would have %d)" % (table.inputs.shape[0], total))
        shape = tuple(len(a) for a in axes) + (table.outputs.shape[1],)
        values = np.empty(shape)
        lookup = {tuple(np.searchsorted(axes[k], table.inputs[i, k])
                        for k in range(len(axes))): i
                  for i in range(table.inputs.shape[0])}
        if len(lookup) != table.inputs.shape[0]:
            raise InterpolationError("inputs do not form a full tensor grid")
        for key, i in lookup.items():
            values[key] = table.outputs[i]
        return fit_multilinear_grid(axes, values)
    raise TypeError("unknown backend spec %r" % (spec,))


def eval_interpolant(g, x):
    """Evaluate g at x; returns (value, out_of_domain_flag)."""
    return g.evaluate(x)
