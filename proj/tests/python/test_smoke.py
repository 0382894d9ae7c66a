import math

import numpy as np
import pytest

import derivdepth as dd


@pytest.fixture(scope="module")
def model():
    scenes = [dd.synth_scene(32, 32, seed) for seed in range(12)]
    return dd.fit_mixture_model(scenes, components=16, seed=0)


def test_filter_bank():
    bank = dd.filter_bank()
    assert len(bank) == 64
    assert bank[0]["kind"] == "impulse"
    assert bank[0]["kernel"].shape == (1, 1)
    assert bank[1]["kind"] == "gaussian"
    assert abs(np.linalg.norm(bank[1]["kernel"]) - 0.25) < 1e-6
    for f in bank[1:]:
        if f["order"] >= 1:
            assert abs(f["kernel"].sum()) < 1e-6


def test_subsets_and_analyze():
    assert dd.parse_subset("scale0") == [0]
    assert len(dd.parse_subset("scale1,scale0")) == 22
    y = np.random.default_rng(0).random((10, 12))
    maps = dd.analyze(y, "scale0")
    np.testing.assert_array_equal(maps[0], y)
    with pytest.raises(ValueError):
        dd.parse_subset("scale9")


def test_model_round_trip(model, tmp_path):
    assert model.means.shape == (64, 16)
    assert np.all(np.diff(model.means, axis=1) > 0)
    path = tmp_path / "m.gmm"
    model.save(path)
    assert dd.MixtureModel.load(path) == model
    q = model.soft_targets(0.3, 0)
    assert abs(sum(q) - 1.0) < 1e-12


def test_predict_and_globalize(model, tmp_path):
    truth = dd.synth_scene(32, 32, 99)
    weights = dd.synth_predict(truth, model, subset="scale0,scale1")
    assert weights.weights.shape == (32, 32, 22, 16)
    np.testing.assert_allclose(weights.weights.sum(axis=-1), 1.0, atol=1e-5)
    weights.save(tmp_path / "w.owm")
    assert dd.WeightMap.load(tmp_path / "w.owm") == weights

    y, trace = dd.globalize(weights, model, subset="scale0,scale1")
    assert y.shape == (32, 32)
    assert len(trace["beta"]) == 137
    rmse = math.sqrt(np.mean((y - truth) ** 2))
    argmax = math.sqrt(np.mean((dd.decode_argmax(weights, model, 0) - truth) ** 2))
    assert rmse < argmax


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.owm"
    path.write_bytes(b"OWM9" + bytes(32))
    with pytest.raises(dd.FileFormatError, match="bad magic"):
        dd.WeightMap.load(path)


def test_metrics_and_pfm(tmp_path):
    m = dd.evaluate(np.array([[2.0, 2.6]]), np.array([[2.0, 2.0]]))
    assert abs(m["rmse_lin"] - math.sqrt(0.18)) < 1e-12
    assert m["delta1"] == 0.5
    z = np.array([[0.5, 2.0], [4.0, 8.0]])
    np.testing.assert_array_equal(dd.scene_to_depth(dd.depth_to_scene(z)), z)
    dd.write_pfm(tmp_path / "z.pfm", z)
    np.testing.assert_array_equal(dd.read_pfm(tmp_path / "z.pfm"), z)
