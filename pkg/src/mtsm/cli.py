"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 method
failure (every requested method failed).
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import geometry as geo
from . import interp, models
from .bench import BenchmarkConfig, run_benchmark
from .clustering import AnchorSelectionConfig
from .data import DataError, SampleSet, load_samples, save_samples

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_METHOD = 4


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="mtsm", description="manifold-valued function approximation")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="run a desk-scale benchmark")
    b.add_argument("which", choices=["spd", "so3", "sphere", "grassmann"])
    b.add_argument("--train-sizes", type=str, default=None,
                   help="comma-separated sample counts (Halton sampling)")
    b.add_argument("--train-grid", type=int, default=None)
    b.add_argument("--test-grid", type=int, default=None)
    b.add_argument("--methods", type=str, default="stsm,mtsm,rmls")
    b.add_argument("--backend", choices=["rbf", "multilinear"], default="rbf")
    b.add_argument("--shape", type=float, default=None,
                   help="RBF shape parameter (default: mean spacing)")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--L", type=float, default=None)
    b.add_argument("--M", type=float, default=None)
    b.add_argument("--rmax", type=int, default=None)
    b.add_argument("--c", type=float, default=0.25)
    b.add_argument("--delta", type=float, default=None,
                   help="moving-least-squares support radius")
    b.add_argument("--out", type=str, default=None)

    f = sub.add_parser("fit", help="fit a model from a samples CSV")
    f.add_argument("--samples", required=True)
    f.add_argument("--manifold", required=True,
                   help="e.g. spd:3, sphere:2, grassmann:6,2")
    f.add_argument("--out", required=True)
    f.add_argument("--backend", choices=["rbf", "multilinear"], default="rbf")
    f.add_argument("--shape", type=float, default=None)
    f.add_argument("--rmax", type=int, default=None)
    f.add_argument("--L", type=float, default=0.0)
    f.add_argument("--M", type=float, default=None)
    f.add_argument("--c", type=float, default=0.25)
    f.add_argument("--seed", type=int, default=0)

    e = sub.add_parser("eval", help="evaluate a saved model on input points")
    e.add_argument("--model", required=True)
    e.add_argument("--inputs", required=True,
                   help="CSV with one comma-separated input point per line")
    e.add_argument("--out", required=True)

    v = sub.add_parser("validate", help="well-posedness diagnostics")
    v.add_argument("--model", required=True)
    v.add_argument("--samples", required=True)

    k = sub.add_parser("kernel-bench",
                       help="compare numba and numpy kernel timing")
    k.add_argument("--repeats", type=int, default=20000)
    return parser


def _cmd_bench(args):
    sizes = None
    if args.train_sizes:
        sizes = [int(tok) for tok in args.train_sizes.split(",") if tok]
    methods = tuple(tok for tok in args.methods.split(",") if tok)
    try:
        cfg = BenchmarkConfig(
            which=args.which, train_sizes=sizes, train_grid=args.train_grid,
            test_grid=args.test_grid, methods=methods, backend=args.backend,
            rbf_shape=args.shape, seed=args.seed, L=args.L, M=args.M,
            rmax=args.rmax,
            cutoff_c=args.c, rmls_delta=args.delta, out=args.out)
    except ValueError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    report = run_benchmark(cfg)
    for row in report.rows:
        print("%s %-5s N=%-5d R=%-3s max=%-12.4e geomean=%-12.4e "
              "offline=%.3fs online=%.3fs %s %s"
              % (row.experiment, row.method, row.train_size,
                 row.R if row.R is not None else "-", row.max_rel_err,
                 row.geomean_rel_err, row.offline_s, row.online_s,
                 row.status, row.message))
    if all(r.status == "failed" for r in report.rows):
        return EXIT_METHOD
    return EXIT_OK


def _cmd_fit(args):
    try:
        man = geo.descriptor_from_label(args.manifold, curvature_lower=args.L)
    except (ValueError, TypeError) as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    try:
        samples = load_samples(args.samples)
    except (DataError, OSError) as exc:
        print("data error: %s" % exc, file=sys.stderr)
        return EXIT_DATA
    if samples.manifold.kind != man.kind or samples.manifold.params != man.params:
        print("data error: samples are on %s, not %s"
              % (samples.manifold.label(), man.label()), file=sys.stderr)
        return EXIT_DATA
    # carry the CLI-supplied curvature/injectivity configuration
    samples = SampleSet(inputs=samples.inputs,
                        outputs=[geo.Point(man, y.coords)
                                 for y in samples.outputs],
                        provenance=samples.provenance)
    M = args.M if args.M is not None else (
        man.inj_estimate if math.isfinite(man.inj_estimate) else 0.0)
    rmax = args.rmax if args.rmax is not None else min(len(samples) - 1, 10)
    backend = (interp.RbfBackend(shape=args.shape) if args.backend == "rbf"
               else interp.MultilinearBackend())
    try:
        acfg = AnchorSelectionConfig(R_max=rmax, M=M, L=args.L,
                                     rng_seed=args.seed)
        model = models.mtsm_fit(samples, acfg, backend=backend,
                                cutoff_c=args.c)
    except (models.ModelError, ValueError) as exc:
        print("method failure: %s" % exc, file=sys.stderr)
        return EXIT_METHOD
    models.save_model(model, args.out)
    print("fitted %d-anchor model on %d samples -> %s"
          % (model.R, len(samples), args.out))
    return EXIT_OK


def _cmd_eval(args):
    try:
        model = models.load_model(args.model)
    except (models.ModelFormatError, OSError) as exc:
        print("data error: %s" % exc, file=sys.stderr)
        return EXIT_DATA
    try:
        with open(args.inputs, "r", encoding="utf-8") as fh:
            rows = [[float(tok) for tok in ln.strip().split(",")]
                    for ln in fh if ln.strip()]
    except (OSError, ValueError) as exc:
        print("data error: %s" % exc, file=sys.stderr)
        return EXIT_DATA
    if not rows:
        print("data error: no input points", file=sys.stderr)
        return EXIT_DATA
    n_failed = 0
    preds = []
    for x in rows:
        try:
            preds.append((x, models.mtsm_eval(model, np.array(x))))
        except (models.EmptySupportError, Exception) as exc:
            n_failed += 1
            print("point %s failed: %s" % (x, exc), file=sys.stderr)
    if not preds:
        print("method failure: every input point failed", file=sys.stderr)
        return EXIT_METHOD
    samples = SampleSet(inputs=np.array([x for x, _ in preds]),
                        outputs=[p for _, p in preds],
                        provenance="model predictions")
    save_samples(samples, args.out)
    print("wrote %d predictions (%d failures) -> %s"
          % (len(preds), n_failed, args.out))
    return EXIT_OK


def _cmd_validate(args):
    try:
        model = models.load_model(args.model)
    except (models.ModelFormatError, OSError) as exc:
        print("data error: %s" % exc, file=sys.stderr)
        return EXIT_DATA
    try:
        samples = load_samples(args.samples)
    except (DataError, OSError) as exc:
        print("data error: %s" % exc, file=sys.stderr)
        return EXIT_DATA
    report = models.validate_wellposedness(model, samples)
    print(report.summary())
    return EXIT_OK


def _cmd_kernel_bench(args):
    from .kernel_bench import run as run_kernel_bench
    run_kernel_bench(repeats=args.repeats)
    return EXIT_OK


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, which matches the config-error code
        return int(exc.code) if exc.code else EXIT_OK
    handlers = {
        "bench": _cmd_bench,
        "fit": _cmd_fit,
        "eval": _cmd_eval,
        "validate": _cmd_validate,
        "kernel-bench": _cmd_kernel_bench,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
