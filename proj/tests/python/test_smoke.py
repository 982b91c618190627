import math

import numpy as np
import pytest

import lmcot


def test_worked_examples_pass():
    rows = lmcot.check_examples()
    assert [r["loss"] for r in rows] == ["softmax", "sphereface", "cosface", "arcface", "lmcot"]
    assert all(r["pass"] for r in rows)


def test_angular_loss_gradient_matches_numpy_differences():
    theta = np.array([[0.3, 1.2, 2.0], [1.1, 0.4, 1.7]])
    labels = [0, 1]
    cfg = lmcot.LossConfig()
    cfg.s = 3.0
    out = lmcot.angular_loss("lmcot", theta, labels, cfg)
    h = 1e-6
    fd = np.zeros_like(theta)
    for idx in np.ndindex(theta.shape):
        up = theta.copy()
        down = theta.copy()
        up[idx] += h
        down[idx] -= h
        fd[idx] = (lmcot.angular_loss("lmcot", up, labels, cfg)["value"]
                   - lmcot.angular_loss("lmcot", down, labels, cfg)["value"]) / (2 * h)
    np.testing.assert_allclose(out["grad"], fd, rtol=1e-5, atol=1e-8)
    assert out["per_sample"].shape == (2,)


def test_cot_kernels_agree():
    for t in np.linspace(0.05, 2.5, 50):
        a = lmcot.cot_via_theta(t, 0.05)
        b = lmcot.cot_via_identity(math.cos(t), 0.05)
        assert a == pytest.approx(b, abs=1e-6)


def test_metrics():
    assert lmcot.auc([0.9, 0.4], [0.5, 0.1]) == 0.75
    assert lmcot.eer([0.8, 0.9], [0.1, 0.2])[0] == 0.0
    assert lmcot.map_at_100([([True, False, True], 2)]) == pytest.approx(5 / 6, abs=1e-15)
    assert lmcot.gap([(0.9, True), (0.8, False)], 2) == 0.5
    assert lmcot.pca2(np.random.default_rng(0).normal(size=(20, 4))).shape == (20, 2)


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        lmcot.auc([], [0.1])
    with pytest.raises(ValueError):
        lmcot.angular_loss("no-such-loss", np.ones((1, 2)), [0])


def test_nms_and_gallery():
    kept = lmcot.nms([lmcot.Box(0, 0, 1, 1, 0.3), lmcot.Box(0, 0, 1, 1, 0.8)], 0.5)
    assert len(kept) == 1 and kept[0].confidence == 0.8

    g = lmcot.Gallery(3)
    statuses = [g.enroll("ana", np.array([1.0, 0.0, 0.1 * k]), True, k) for k in range(6)]
    assert statuses[:5] == ["stored"] * 5 and statuses[5] == "rejected-capacity"
    assert g.count("ana") == 5
    name, sim = g.match(np.array([1.0, 0.0, 0.0]))
    assert name == "ana" and sim > 0.9
    assert lmcot.Gallery.loads(g.dumps()) == g


def test_cli_in_process():
    code, out, _ = lmcot.run_cli(["check-examples", "--format", "record"])
    assert code == 0 and "loss=lmcot" in out
    code, _, _ = lmcot.run_cli(["gradcheck", "--loss", "bogus"])
    assert code == 2


def test_short_training_run():
    report = lmcot.train("lmcot", steps=20, spread=0.5)
    assert report["metric"] == "eer"
    assert len(report["loss_curve"]) == 20
