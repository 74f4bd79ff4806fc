import numpy as np

from mtsm import bench, geometry as geo


def test_spd_test_function_properties():
    man = geo.spd(3)
    # closed-form value at the origin: the field there is 18 * I
    val = bench.spd_test_function(np.array([0.0, 0.0]), man)
    assert np.linalg.norm(val.coords - 18.0 * np.eye(3)) <= 1e-12
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.uniform(-1.0, 1.0, size=2)
        p = bench.spd_test_function(x, man)
        assert np.array_equal(p.coords, p.coords.T)
        assert np.linalg.eigvalsh(p.coords).min() > 1.0
        geo.validate_point(p)


def test_so3_test_function_properties():
    man = geo.special_orthogonal(3)
    val = bench.so3_test_function(np.array([0.0, 0.0]), man)
    assert np.linalg.norm(val.coords - np.eye(3)) <= 1e-12
    rng = np.random.default_rng(1)
    for _ in range(20):
        x = rng.uniform(-0.5, 0.5, size=2)
        geo.validate_point(bench.so3_test_function(x, man))


def test_sphere_and_grassmann_test_functions():
    s = geo.sphere(2)
    g = geo.grassmann(10, 3)
    rng = np.random.default_rng(2)
    for _ in range(10):
        geo.validate_point(bench.sphere_test_function(rng.uniform(size=2), s))
        geo.validate_point(
            bench.grassmann_test_function(rng.uniform(size=1), g))


def test_halton_sequence():
    pts = bench.halton2d(4)
    want = np.array([[1 / 2, 1 / 3], [1 / 4, 2 / 3], [3 / 4, 1 / 9],
                     [1 / 8, 4 / 9]])
    assert np.allclose(pts, want, atol=1e-15)
    big = bench.halton2d(500)
    assert big.min() >= 0.0 and big.max() < 1.0


def test_grids():
    box = [(0.0, 1.0)]
    cheb = bench.chebyshev_grid(3, box)
    assert np.allclose(sorted(cheb[:, 0]), [0.0, 0.5, 1.0], atol=1e-15)
    assert np.allclose(bench.chebyshev_grid(1, box), [[0.5]])
    uni = bench.uniform_grid(3, [(0.0, 1.0), (0.0, 2.0)])
    assert uni.shape == (9, 2)
    assert uni[:, 0].min() == 0.0 and uni[:, 0].max() == 1.0
    assert uni[:, 1].max() == 2.0
    assert np.allclose(bench.uniform_grid(1, box), [[0.5]])


def test_rel_err_max_counts_failures():
    man = geo.sphere(2)
    t = geo.Point(man, np.array([1.0, 0.0, 0.0]))
    p = geo.Point(man, np.array([0.0, 1.0, 0.0]))
    mx, gm, failed = bench.rel_err_max([t, t], [p, None])
    assert failed == 1
    assert abs(mx - np.pi / 2) <= 1e-14
    assert abs(gm - mx) <= 1e-14  # single value


def test_tiny_benchmark_rows_and_determinism(tmp_path):
    cfg = dict(which="grassmann", train_grid=12, test_grid=15,
               methods=("stsm", "mtsm", "rmls"), rmax=3)
    r1 = bench.run_benchmark(bench.BenchmarkConfig(**cfg))
    r2 = bench.run_benchmark(bench.BenchmarkConfig(**cfg))
    assert [r.method for r in r1.rows] == ["stsm", "mtsm", "rmls"]
    for a, b in zip(r1.rows, r2.rows):
        assert a.status == "ok"
        # everything except wall-clock timings is reproducible
        assert a.max_rel_err == b.max_rel_err
        assert a.geomean_rel_err == b.geomean_rel_err
        assert a.R == b.R
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    bench.write_report_csv(r1, str(p1))
    bench.write_report_csv(r2, str(p2))
    strip = lambda path: [
        ",".join(ln.split(",")[:6]) for ln in path.read_text().splitlines()]
    assert strip(p1) == strip(p2)
    header = p1.read_text().splitlines()[0]
    assert header.startswith("experiment,method,train_size,R,max_rel_err")


def test_failed_method_is_reported_not_raised():
    # an absurdly small support radius starves the moving-least-squares
    # method at most test points but must not abort the run
    cfg = bench.BenchmarkConfig(which="grassmann", train_grid=8, test_grid=10,
                                methods=("rmls",), rmls_delta=1e-6)
    report = bench.run_benchmark(cfg)
    row = report.rows[0]
    assert row.method == "rmls"
    assert row.status == "failed" or "failed evaluation" in row.message
