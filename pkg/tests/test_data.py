import numpy as np
import pytest

from mtsm import bench, geometry as geo
from mtsm.data import DataError, SampleSet, load_samples, save_samples


def _sample_set():
    man = geo.sphere(2)
    f = lambda x: bench.sphere_test_function(x, man)
    xs = bench.uniform_grid(4, [(0.0, 1.0), (0.0, 1.0)])
    return SampleSet(inputs=xs, outputs=[f(x) for x in xs],
                     provenance="test")


def test_save_load_roundtrip(tmp_path):
    samples = _sample_set()
    path = tmp_path / "samples.csv"
    save_samples(samples, str(path))
    loaded = load_samples(str(path))
    assert len(loaded) == len(samples)
    assert loaded.manifold.label() == "sphere:2"
    assert np.allclose(loaded.inputs, samples.inputs, atol=0)
    for a, b in zip(loaded.outputs, samples.outputs):
        assert np.array_equal(a.coords, b.coords)


def test_bad_rows_rejected_with_indices(tmp_path):
    samples = _sample_set()
    path = tmp_path / "samples.csv"
    save_samples(samples, str(path))
    lines = path.read_text().splitlines()
    parts = lines[4].split(",")
    parts[2] = "%.17g" % (float(parts[2]) + 0.5)  # breaks unit norm
    lines[4] = ",".join(parts)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DataError) as exc:
        load_samples(str(path))
    assert "row 2" in str(exc.value)


def test_malformed_files(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("")
    with pytest.raises(DataError):
        load_samples(str(p))
    p.write_text("wrong,header\n")
    with pytest.raises(DataError):
        load_samples(str(p))
    p.write_text("n,m,manifold_kind,params\n2,3,sphere,2\n")
    with pytest.raises(DataError):
        load_samples(str(p))
    # a row with too few fields
    p.write_text("n,m,manifold_kind,params\n2,3,sphere,2\n0.0,0.0,1.0\n")
    with pytest.raises(DataError):
        load_samples(str(p))
    # metadata inconsistent with the manifold's ambient dimension
    p.write_text("n,m,manifold_kind,params\n2,7,sphere,2\n")
    with pytest.raises(DataError):
        load_samples(str(p))


def test_sampleset_length_and_manifold():
    samples = _sample_set()
    assert len(samples) == 16
    assert samples.manifold.kind == "sphere"
