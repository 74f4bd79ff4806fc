import numpy as np
import pytest

from mtsm import bench, geometry as geo
from mtsm.cli import main
from mtsm.data import SampleSet, save_samples


@pytest.fixture()
def sphere_csv(tmp_path):
    man = geo.sphere(2)
    f = lambda x: bench.sphere_test_function(x, man)
    xs = bench.uniform_grid(6, [(0.0, 1.0), (0.0, 1.0)])
    samples = SampleSet(inputs=xs, outputs=[f(x) for x in xs],
                        provenance="cli test")
    path = tmp_path / "samples.csv"
    save_samples(samples, str(path))
    return str(path)


def test_fit_eval_validate_roundtrip(sphere_csv, tmp_path, capsys):
    model_path = str(tmp_path / "model.mtsm")
    rc = main(["fit", "--samples", sphere_csv, "--manifold", "sphere:2",
               "--out", model_path, "--rmax", "4", "--M", "3.14159"])
    assert rc == 0

    inputs_path = tmp_path / "queries.csv"
    inputs_path.write_text("0.25,0.25\n0.5,0.5\n0.75,0.75\n")
    out_path = tmp_path / "preds.csv"
    rc = main(["eval", "--model", model_path, "--inputs", str(inputs_path),
               "--out", str(out_path)])
    assert rc == 0
    lines = out_path.read_text().strip().splitlines()
    assert lines[0].replace(" ", "") == "n,m,manifold_kind,params"
    rows = lines[2:]
    assert len(rows) == 3
    man = geo.sphere(2)
    for row in rows:
        vals = np.array([float(t) for t in row.split(",")])
        geo.validate_point(geo.Point(man, vals[2:].reshape(man.ambient_shape)))

    rc = main(["validate", "--model", model_path, "--samples", sphere_csv])
    assert rc == 0
    out = capsys.readouterr().out
    assert "cover check" in out


def test_bench_command(tmp_path):
    out = tmp_path / "report.csv"
    rc = main(["bench", "grassmann", "--train-grid", "10", "--test-grid",
               "10", "--methods", "stsm,rmls", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("experiment,method")
    assert len(lines) == 3


def test_config_errors_exit_2(sphere_csv, tmp_path):
    # unknown manifold label
    rc = main(["fit", "--samples", sphere_csv, "--manifold", "torus:2",
               "--out", str(tmp_path / "m.mtsm")])
    assert rc == 2
    # empty benchmark method list
    rc = main(["bench", "sphere", "--methods", ",",
               "--train-grid", "4", "--test-grid", "4"])
    assert rc == 2
    # a method that cannot run on the data exits with the method code
    rc = main(["bench", "grassmann", "--methods", "mtsm", "--train-grid",
               "5", "--test-grid", "4", "--rmax", "10"])
    assert rc == 4


def test_data_errors_exit_3(tmp_path):
    rc = main(["fit", "--samples", str(tmp_path / "missing.csv"),
               "--manifold", "sphere:2", "--out", str(tmp_path / "m.mtsm")])
    assert rc == 3
    bad_model = tmp_path / "bad.mtsm"
    bad_model.write_text("not a model\n")
    inputs = tmp_path / "q.csv"
    inputs.write_text("0.5,0.5\n")
    rc = main(["eval", "--model", str(bad_model), "--inputs", str(inputs),
               "--out", str(tmp_path / "o.csv")])
    assert rc == 3


def test_kernel_bench_runs(capsys):
    rc = main(["kernel-bench", "--repeats", "50"])
    assert rc == 0
    out = capsys.readouterr().out.lower()
    assert "numpy" in out
