"""Sample sets and their CSV persistence."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo


class DataError(Exception):
    pass


@dataclass
class SampleSet:
    inputs: np.ndarray = field(repr=False)  # (N, n)
    outputs: list = field(repr=False)  # N Points on one manifold
    provenance: str = ""

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        if x.shape[0] != len(self.outputs):
            raise DataError("inputs and outputs disagree on sample count")
        if x.shape[0] < 1:
            raise DataError("need at least one sample")
        if not np.all(np.isfinite(x)):
            raise DataError("non-finite input coordinates")
        man = self.outputs[0].manifold
        for y in self.outputs:
            if y.manifold != man:
                raise DataError("outputs live on different manifolds")
        self.inputs = x

    @property
    def manifold(self):
        return self.outputs[0].manifold

    def __len__(self):
        return self.inputs.shape[0]


_FMT = "%.17g"


def save_samples(samples, path):
    """Samples CSV: a field-name header line, a metadata line (n, m,
    manifold kind, params), then one row x_1..x_n,y_1..y_m per sample with
    outputs row-major flattened."""
    man = samples.manifold
    n = samples.inputs.shape[1]
    m = man.ambient_dim
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("n,m,manifold_kind,params\n")
        fh.write("%d,%d,%s,%s\n" % (n, m, man.kind,
                                    " ".join(str(p) for p in man.params)))
        for x, y in zip(samples.inputs, samples.outputs):
            row = [_FMT % v for v in x] + [_FMT % v for v in y.flat()]
            fh.write(",".join(row) + "\n")


def load_samples(path, invariant_tol=1e-8, **manifold_kwargs):
    """Load a samples CSV, validating manifold invariants per row.

    Rows whose outputs violate the Point invariants beyond invariant_tol
    are rejected (reported by row index); nothing is silently projected.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise DataError("no samples: empty file")
    if lines[0].replace(" ", "") != "n,m,manifold_kind,params":
        raise DataError("malformed header line %r" % lines[0])
    if len(lines) < 2:
        raise DataError("missing metadata line")
    meta = [tok.strip() for tok in lines[1].split(",")]
    if len(meta) != 4:
        raise DataError("malformed metadata line %r" % lines[1])
    try:
        n, m = int(meta[0]), int(meta[1])
    except ValueError as exc:
        raise DataError("malformed dimensions in metadata") from exc
    kind, params = meta[2], meta[3]
    man = geo.descriptor_from_label(
        "%s:%s" % (kind, params.replace(" ", ",")), **manifold_kwargs)
    if man.ambient_dim != m:
        raise DataError("ambient dimension %d does not match manifold %s"
                        % (m, man.label()))
    rows = lines[2:]
    if not rows:
        raise DataError("no samples: header only")
    inputs, outputs, bad = [], [], []
    for ridx, row in enumerate(rows):
        vals = [float(tok) for tok in row.split(",")]
        if len(vals) != n + m:
            raise DataError("row %d has %d fields, expected %d"
                            % (ridx, len(vals), n + m))
        x = np.array(vals[:n])
        y = np.array(vals[n:]).reshape(man.ambient_shape)
        try:
            pt = geo.Point(man, y)
            geo.validate_point(pt, tol=invariant_tol)
        except geo.ManifoldError as exc:
            bad.append((ridx, str(exc)))
            continue
        inputs.append(x)
        outputs.append(pt)
    if bad:
        raise DataError("rejected rows failing manifold invariants: %s"
                        % ["row %d: %s" % b for b in bad])
    return SampleSet(inputs=np.array(inputs), outputs=outputs,
                     provenance="loaded from %s" % path)
