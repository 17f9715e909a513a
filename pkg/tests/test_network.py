"""Square-activation network: forward algebra, gradients, training."""

import math

import numpy as np
import pytest

from fescore import network as net
from fescore import preprocess as pp
from fescore.errors import DimensionMismatch
from fescore.preprocess import CleanDataset


def test_forward_zero_input_gives_zero_scores():
    params = net.NetworkParams(pr=np.ones((4, 3)), d_mat=np.ones((3, 2)))
    assert net.forward(np.zeros(4), params).tolist() == [0.0, 0.0]


def test_forward_hand_computed():
    # n=1, d=1, Pr=[2], D=[[1, -1]], x=3 -> square(6)·[1,-1] = (36, -36)
    params = net.NetworkParams(pr=[[2.0]], d_mat=[[1.0, -1.0]])
    out = net.forward([3.0], params)
    assert out.tolist() == [36.0, -36.0]


def test_forward_accepts_paper_scale_dims():
    rng = np.random.default_rng(0)
    params = net.NetworkParams(pr=rng.normal(size=(130, 20)), d_mat=rng.normal(size=(20, 2)))
    out = net.forward(rng.uniform(size=130), params)
    assert out.shape == (2,)


def test_forward_shape_mismatch():
    params = net.NetworkParams(pr=np.ones((4, 3)), d_mat=np.ones((3, 2)))
    with pytest.raises(DimensionMismatch):
        net.forward(np.zeros(5), params)


def test_loss_at_zero_weights_is_ln2():
    params = net.NetworkParams(pr=np.zeros((3, 2)), d_mat=np.zeros((2, 2)))
    X = np.random.default_rng(1).uniform(size=(8, 3))
    Y = np.tile([1.0, 0.0], (8, 1))
    loss, _ = net.loss_and_gradients(X, Y, params)
    assert abs(loss - math.log(2)) < 1e-12


def test_duplicated_sample_same_gradient_as_single():
    rng = np.random.default_rng(2)
    params = net.NetworkParams(pr=rng.normal(size=(3, 2)), d_mat=rng.normal(size=(2, 2)))
    x = rng.uniform(size=(1, 3))
    y = np.array([[0.0, 1.0]])
    _, (g1p, g1d) = net.loss_and_gradients(x, y, params)
    _, (g2p, g2d) = net.loss_and_gradients(np.repeat(x, 4, axis=0), np.repeat(y, 4, axis=0), params)
    np.testing.assert_allclose(g1p, g2p, atol=1e-12)
    np.testing.assert_allclose(g1d, g2d, atol=1e-12)


def _finite_difference_check(seed):
    rng = np.random.default_rng(seed)
    n, d, l, m = 3, 2, 2, 4
    params = net.NetworkParams(pr=rng.normal(scale=0.7, size=(n, d)),
                               d_mat=rng.normal(scale=0.7, size=(d, l)))
    X = rng.uniform(size=(m, n))
    Y = np.eye(l)[rng.integers(0, l, m)]
    _, (g_pr, g_d) = net.loss_and_gradients(X, Y, params)
    h = 1e-5
    worst = 0.0
    for arr, grad in ((params.pr, g_pr), (params.d_mat, g_d)):
        for idx in np.ndindex(arr.shape):
            orig = arr[idx]
            arr[idx] = orig + h
            lp, _ = net.loss_and_gradients(X, Y, params)
            arr[idx] = orig - h
            lm, _ = net.loss_and_gradients(X, Y, params)
            arr[idx] = orig
            fd = (lp - lm) / (2 * h)
            denom = max(abs(fd), abs(grad[idx]), 1e-8)
            worst = max(worst, abs(fd - grad[idx]) / denom)
    return worst


def test_gradients_match_finite_differences():
    assert _finite_difference_check(seed=3) <= 1e-4


def _toy_clean(rows=96, n=6, seed=4):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, rows)
    centers = np.stack([np.full(n, 0.25), np.full(n, 0.75)])
    feats = np.clip(centers[labels] + rng.normal(scale=0.08, size=(rows, n)), 0, 1)
    onehot = np.eye(2)[labels]
    return CleanDataset(features=feats, labels=onehot,
                        feature_names=[f"f{i}" for i in range(n)],
                        label_classes=["no", "yes"])


def test_training_decreases_loss_and_is_deterministic():
    data = _toy_clean()
    cfg = net.TrainConfig(epochs=12, hidden_dim=3, seed=9, learning_rate=5e-3)
    r1 = net.train(data, cfg)
    r2 = net.train(data, cfg)
    assert r1.epoch_losses[-1] < r1.epoch_losses[0]
    np.testing.assert_array_equal(r1.params.pr, r2.params.pr)
    np.testing.assert_array_equal(r1.params.d_mat, r2.params.d_mat)


def test_train_config_defaults_match_operating_point():
    cfg = net.TrainConfig()
    assert cfg.learning_rate == 1e-4
    assert cfg.batch_size == 32
    assert cfg.epochs == 50


def test_diagonalize_identity_and_quadratic_form():
    assert (net.diagonalize([1, 1, 1]) == np.eye(3)).all()
    # d_col=(2,-3), K=(5,7): K^T Diag K = 2*25 - 3*49 = -97
    diag = net.diagonalize([2, -3])
    k = np.array([5, 7])
    assert int(k @ diag @ k) == -97
    assert int((k * k) @ np.array([2, -3])) == -97
    assert (net.diagonalize([0, 0]) == np.zeros((2, 2))).all()


def test_square_reduction_identity_integer_instances():
    rng = np.random.default_rng(5)
    for _ in range(30):
        n = int(rng.integers(1, 7))
        d = int(rng.integers(1, 5))
        x = rng.integers(-9, 10, n)
        pr = rng.integers(-9, 10, (n, d))
        d_col = rng.integers(-9, 10, d)
        k = [sum(int(x[i]) * int(pr[i][j]) for i in range(n)) for j in range(d)]
        lhs = sum((kj * kj) * int(dj) for kj, dj in zip(k, d_col))
        rhs = sum(int(d_col[j]) * k[j] * k[j] for j in range(d))  # K^T Diag K expanded
        diag = net.diagonalize(d_col)
        quad = int(np.array(k) @ diag @ np.array(k))
        assert lhs == rhs == quad


def test_export_quantized_and_integer_forward_consistency():
    rng = np.random.default_rng(6)
    params = net.NetworkParams(pr=rng.uniform(-1, 1, (5, 3)), d_mat=rng.uniform(-1, 1, (3, 2)))
    cfg = pp.QuantConfig(scale_x=64, scale_p=64, scale_d=64, clip=1.0)
    pr_int, d_int = net.export_quantized(params, cfg)
    assert (pr_int == 0).all() == False  # noqa: E712 - some structure survived
    x = rng.uniform(0, 1, 5)
    scores = net.int_forward(pp.quantize_record(x, cfg).values, pr_int, d_int)
    deq = [pp.dequantize_score(v, cfg) for v in scores]
    f = net.forward(x, params)
    assert max(abs(a - b) for a, b in zip(f, deq)) <= pp.quantization_error_bound(cfg, 5, 3)


def test_zero_params_export_zero():
    params = net.NetworkParams(pr=np.zeros((4, 2)), d_mat=np.zeros((2, 2)))
    pr_int, d_int = net.export_quantized(params, pp.DESK_PROFILE)
    assert not pr_int.any() and not d_int.any()


def test_model_file_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    params = net.NetworkParams(pr=rng.normal(size=(4, 2)), d_mat=rng.normal(size=(2, 2)))
    path = tmp_path / "model.json"
    net.save_model(path, params, qcfg=pp.DESK_PROFILE, feature_names=list("abcd"),
                   label_classes=["n", "y"])
    doc = net.load_model(path)
    np.testing.assert_array_equal(doc["params"].pr, params.pr)
    np.testing.assert_array_equal(doc["params"].d_mat, params.d_mat)
    assert doc["quantized"]["config_digest"] == pp.DESK_PROFILE.digest()
