"""Micro-benchmark of the hot kernels: numba path vs pure numpy.

Run as `mtsm kernel-bench` or `python -m mtsm.kernel_bench`.
"""

from __future__ import annotations

import time

import numpy as np

from . import kernels


def _time_fn(fn, args, repeats):
    fn(*args)  # warm-up / JIT compile
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats


def run(repeats=20000):
    rng = np.random.default_rng(0)
    A = rng.standard_normal((3, 3))
    P = A @ A.T + 3.0 * np.eye(3)
    B = rng.standard_normal((3, 3))
    Q = B @ B.T + 2.0 * np.eye(3)
    V = 0.5 * (A + A.T)
    p = rng.standard_normal(3)
    p /= np.linalg.norm(p)
    q = rng.standard_normal(3)
    q /= np.linalg.norm(q)
    v = q - np.dot(p, q) * p

    cases = [
        ("spd_log", (P, Q)),
        ("spd_exp", (P, V)),
        ("spd_dist", (P, Q)),
        ("sphere_exp", (p, v)),
        ("sphere_log", (p, q)),
    ]
    pure = kernels.pure_numpy_kernels()
    print("active path: %s" % ("numba" if kernels.USING_NUMBA else "numpy"))
    print("%-12s %12s %12s %8s" % ("kernel", "numpy [us]", "active [us]",
                                   "speedup"))
    for name, args in cases:
        t_np = _time_fn(pure[name], args, repeats)
        t_active = _time_fn(getattr(kernels, name), args, repeats)
        print("%-12s %12.2f %12.2f %8.2fx"
              % (name, t_np * 1e6, t_active * 1e6,
                 t_np / t_active if t_active > 0 else float("inf")))


if __name__ == "__main__":
    run()
