"""MLP from scratch: init, forward, gradients (finite-diff checked), SGD."""
import numpy as np
import pytest

from hetfed.nn import (
    ModelParams,
    TrainingConfig,
    finite_diff_check,
    flatten_last_layer,
    forward,
    init_mlp,
    load_params_csv,
    loss_and_grads,
    predict,
    save_params_csv,
    sgd_epoch,
    sgd_step,
)


def bias_only_net(bias) -> ModelParams:
    """Single-layer net with zero weights: logits equal the bias vector."""
    bias = np.asarray(bias, dtype=np.float64)
    return ModelParams((1, len(bias)), np.concatenate([np.zeros(len(bias)), bias]))


# ---------------- init ---------------- #


def test_init_shapes_and_bounds():
    p = init_mlp([4, 3], seed=0)
    assert p.num_params == 4 * 3 + 3
    (W, b), = p.layers()
    assert W.shape == (3, 4)
    assert b.shape == (3,)
    a = np.sqrt(6.0 / (4 + 3))
    assert np.all(np.abs(W) <= a)
    assert np.all(b == 0.0)


def test_init_deterministic():
    a = init_mlp([5, 7, 3], seed=42)
    b = init_mlp([5, 7, 3], seed=42)
    assert np.array_equal(a.flat, b.flat)
    c = init_mlp([5, 7, 3], seed=43)
    assert not np.array_equal(a.flat, c.flat)


def test_init_rejects_bad_arch():
    with pytest.raises(ValueError):
        init_mlp([4], seed=0)
    with pytest.raises(ValueError):
        init_mlp([4, 0, 3], seed=0)


def test_model_params_validates_flat_length():
    with pytest.raises(ValueError):
        ModelParams((2, 3), np.zeros(5))


def test_training_config_validation():
    TrainingConfig(0.1, 4, 1, 0)
    with pytest.raises(ValueError):
        TrainingConfig(-0.1, 4, 1, 0)
    with pytest.raises(ValueError):
        TrainingConfig(0.1, 0, 1, 0)
    with pytest.raises(ValueError):
        TrainingConfig(0.1, 4, -1, 0)


# ---------------- forward / predict ---------------- #


def test_forward_zero_params_zero_logits():
    p = ModelParams((3, 4, 2), np.zeros(3 * 4 + 4 + 4 * 2 + 2))
    X = np.random.default_rng(0).normal(size=(5, 3))
    assert np.array_equal(forward(p, X), np.zeros((5, 2)))


def test_forward_identity_single_layer():
    flat = np.concatenate([np.eye(3).ravel(), np.zeros(3)])
    p = ModelParams((3, 3), flat)
    X = np.random.default_rng(1).normal(size=(4, 3))
    assert np.allclose(forward(p, X), X)


def test_forward_shape_and_validation():
    p = init_mlp([6, 5, 4], seed=1)
    X = np.zeros((7, 6))
    assert forward(p, X).shape == (7, 4)
    with pytest.raises(ValueError):
        forward(p, np.zeros((7, 5)))
    with pytest.raises(ValueError):
        forward(p, np.zeros((0, 6)))


def test_predict_hand_logits_and_tie_break():
    assert predict(bias_only_net([0.1, 2.0, -1.0]), np.array([0.0])) == 1
    assert predict(bias_only_net([1.0, 1.0]), np.array([0.0])) == 0  # tie -> smaller
    batch = predict(bias_only_net([0.1, 2.0, -1.0]), np.zeros((3, 1)))
    assert np.array_equal(batch, [1, 1, 1])


def test_predict_shift_invariance():
    p = init_mlp([4, 6, 3], seed=9)
    X = np.random.default_rng(2).normal(size=(20, 4))
    before = predict(p, X)
    shifted = p.copy()
    shifted.flat[-3:] += 7.5  # constant added to every output bias
    assert np.array_equal(before, predict(shifted, X))


# ---------------- loss and gradients ---------------- #


def test_loss_uniform_logits_is_log_c():
    for C in (2, 5, 10):
        arch = (3, C)
        p = ModelParams(arch, np.zeros(3 * C + C))
        X = np.random.default_rng(0).normal(size=(8, 3))
        y = np.random.default_rng(1).integers(0, C, size=8)
        loss, _ = loss_and_grads(p, X, y)
        assert loss == pytest.approx(np.log(C), rel=1e-12)


def test_loss_nonnegative():
    rng = np.random.default_rng(3)
    for seed in range(5):
        p = init_mlp([4, 5, 3], seed=seed)
        X = rng.normal(size=(6, 4))
        y = rng.integers(0, 3, size=6)
        loss, _ = loss_and_grads(p, X, y)
        assert loss >= 0.0


def test_gradient_matches_finite_differences_twenty_nets():
    rng = np.random.default_rng(12)
    for seed in range(20):
        widths = [int(rng.integers(2, 7)) for _ in range(int(rng.integers(2, 4)))]
        p = init_mlp(widths, seed=seed)
        X = rng.normal(size=(int(rng.integers(2, 9)), widths[0]))
        y = rng.integers(0, widths[-1], size=X.shape[0])
        assert finite_diff_check(p, X, y, eps=1e-5) < 1e-4


def test_corrupted_gradient_flagged():
    p = init_mlp([3, 4, 2], seed=0)
    rng = np.random.default_rng(0)
    X = rng.normal(size=(6, 3))
    y = rng.integers(0, 2, size=6)
    _, grads = loss_and_grads(p, X, y)
    bad = grads.copy()
    idx = int(np.argmax(np.abs(bad.flat)))
    bad.flat[idx] *= 2.0
    assert finite_diff_check(p, X, y, eps=1e-5, grads=bad) > 0.3


# ---------------- SGD ---------------- #


def test_sgd_step_identities():
    p = init_mlp([3, 2], seed=5)
    zero = ModelParams(p.arch, np.zeros_like(p.flat))
    assert np.array_equal(sgd_step(p, zero, 0.5).flat, p.flat)
    _, grads = loss_and_grads(p, np.ones((2, 3)), np.array([0, 1]))
    assert np.array_equal(sgd_step(p, grads, 0.0).flat, p.flat)
    with pytest.raises(ValueError):
        sgd_step(p, init_mlp([3, 3], seed=0), 0.1)


def test_sgd_step_reduces_loss():
    p = init_mlp([4, 3], seed=2)
    rng = np.random.default_rng(4)
    X = rng.normal(size=(10, 4))
    y = rng.integers(0, 3, size=10)
    loss0, grads = loss_and_grads(p, X, y)
    loss1, _ = loss_and_grads(sgd_step(p, grads, 0.05), X, y)
    assert loss1 < loss0


def test_sgd_epoch_value_semantics():
    p = init_mlp([3, 4, 2], seed=1)
    before = p.flat.copy()
    rng = np.random.default_rng(5)
    X = rng.normal(size=(9, 3))
    y = rng.integers(0, 2, size=9)
    out = sgd_epoch(p, X, y, batch_size=4, lr=0.1)
    assert np.array_equal(p.flat, before)  # input untouched
    assert not np.array_equal(out.flat, before)
    loss_and_grads(p, X, y)
    assert np.array_equal(p.flat, before)


def test_sgd_epoch_zero_lr_identity():
    p = init_mlp([3, 2], seed=8)
    X = np.random.default_rng(0).normal(size=(5, 3))
    y = np.array([0, 1, 0, 1, 0])
    out = sgd_epoch(p, X, y, batch_size=2, lr=0.0)
    assert np.array_equal(out.flat, p.flat)


def test_trains_linearly_separable_toy_to_perfection():
    rng = np.random.default_rng(0)
    n = 40
    X = np.vstack([
        rng.normal(loc=(-2.0, 0.0), scale=0.4, size=(n, 2)),
        rng.normal(loc=(2.0, 0.0), scale=0.4, size=(n, 2)),
    ])
    y = np.repeat([0, 1], n)
    p = init_mlp([2, 8, 2], seed=3)
    for _ in range(200):
        loss, grads = loss_and_grads(p, X, y)
        p = sgd_step(p, grads, 0.5)
    assert np.mean(predict(p, X) == y) == 1.0


# ---------------- last layer and serialization ---------------- #


def test_flatten_last_layer_layout():
    p = ModelParams((2, 2), np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]))
    assert np.array_equal(flatten_last_layer(p), [1, 2, 3, 4, 5, 6])
    q = init_mlp([5, 4, 3], seed=0)
    v = flatten_last_layer(q)
    assert v.shape == (3 * 4 + 3,)
    (W, b) = q.layers()[-1]
    assert np.array_equal(v, np.concatenate([W.ravel(), b]))


def test_params_csv_round_trip(tmp_path):
    p = init_mlp([4, 3, 2], seed=17)
    path = str(tmp_path / "params.csv")
    save_params_csv(p, path)
    q = load_params_csv(path)
    assert q.arch == p.arch
    assert np.array_equal(q.flat, p.flat)
