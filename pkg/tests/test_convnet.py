import numpy as np
import pytest

from ctxaug.convnet import (
    Conv,
    GlobalAvgPool,
    MaxPool,
    NetworkSpec,
    Relu,
    TrainConfig,
    backward,
    build_micro_network,
    build_paper_network,
    conv_backward,
    conv_forward,
    evaluate,
    forward,
    gap_backward,
    gap_forward,
    init_params,
    load_weights,
    parse_config,
    pool_backward,
    pool_forward,
    preprocess,
    relu_backward,
    relu_forward,
    run_experiment,
    save_weights,
    sgd_momentum_step,
    softmax_xent,
    train,
    train_config_from,
    write_log_csv,
)
from ctxaug.convnet import layers as L
from ctxaug.errors import EmptyDataset, LabelOutOfRange, ShapeMismatch
from ctxaug.synthetic import make_blob_dataset

RNG = np.random.default_rng(777)


def central_diff(f, arr, h=1e-5):
    """Finite-difference oracle: independent of the analytic path."""
    grad = np.zeros_like(arr)
    it = np.nditer(arr, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        old = arr[idx]
        arr[idx] = old + h
        fp = f()
        arr[idx] = old - h
        fm = f()
        arr[idx] = old
        grad[idx] = (fp - fm) / (2 * h)
    return grad


def rel_err(numeric, analytic):
    denom = max(np.abs(numeric).max(), np.abs(analytic).max(), 1e-12)
    return np.abs(numeric - analytic).max() / denom


class TestConvLayer:
    def test_one_by_one_identity(self):
        x = RNG.normal(size=(2, 1, 4, 4))
        w = np.ones((1, 1, 1, 1))
        y, _ = conv_forward(x, w, np.zeros(1))
        assert np.allclose(y, x)

    def test_hand_case(self):
        x = np.array([[[[1.0, 2.0], [3.0, 4.0]]]])
        w = np.array([[[[1.0, 0.0], [0.0, 1.0]]]])
        y, _ = conv_forward(x, w, np.zeros(1))
        assert y.shape == (1, 1, 1, 1)
        assert y[0, 0, 0, 0] == 5.0

    def test_gradients_match_finite_differences(self):
        x = RNG.normal(size=(1, 2, 5, 5))
        w = RNG.normal(size=(3, 2, 3, 3))
        b = RNG.normal(size=3)
        y, cache = conv_forward(x, w, b)
        dy = RNG.normal(size=y.shape)
        dx, dw, db = conv_backward(dy, cache)
        f = lambda: float((conv_forward(x, w, b)[0] * dy).sum())
        assert rel_err(central_diff(f, x), dx) < 1e-6
        assert rel_err(central_diff(f, w), dw) < 1e-6
        assert rel_err(central_diff(f, b), db) < 1e-6

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            conv_forward(RNG.normal(size=(1, 2, 4, 4)), RNG.normal(size=(3, 5, 3, 3)), np.zeros(3))
        with pytest.raises(ShapeMismatch):
            conv_forward(RNG.normal(size=(1, 2, 2, 2)), RNG.normal(size=(3, 2, 3, 3)), np.zeros(3))


class TestPoolLayer:
    def test_hand_case(self):
        x = np.array([[[[1.0, 2.0], [3.0, 4.0]]]])
        y, _ = pool_forward(x, 2, 2)
        assert y[0, 0, 0, 0] == 4.0

    def test_floor_division_shape(self):
        x = RNG.normal(size=(1, 1, 11, 11))
        y, _ = pool_forward(x, 2, 2)
        assert y.shape == (1, 1, 5, 5)

    def test_constant_input_ties_to_first_index(self):
        x = np.ones((1, 1, 4, 4))
        y, cache = pool_forward(x, 2, 2)
        assert (y == 1.0).all()
        dx = pool_backward(np.ones_like(y), cache)
        # Gradient concentrates at the first (top-left) element of each window.
        expected = np.zeros_like(x)
        expected[0, 0, ::2, ::2] = 1.0
        assert np.array_equal(dx, expected)

    def test_gradient_matches_finite_differences(self):
        x = RNG.normal(size=(2, 2, 6, 6))
        y, cache = pool_forward(x, 3, 3)
        dy = RNG.normal(size=y.shape)
        dx = pool_backward(dy, cache)
        f = lambda: float((pool_forward(x, 3, 3)[0] * dy).sum())
        assert rel_err(central_diff(f, x), dx) < 1e-6


class TestReluGap:
    def test_relu_values(self):
        y, _ = relu_forward(np.array([-1.0, 0.0, 2.0]))
        assert y.tolist() == [0.0, 0.0, 2.0]

    def test_relu_gradient_zero_at_zero(self):
        x = np.array([-1.0, 0.0, 2.0])
        _, cache = relu_forward(x)
        dx = relu_backward(np.ones(3), cache)
        assert dx.tolist() == [0.0, 0.0, 1.0]

    def test_gap_constant_channel(self):
        x = np.full((1, 2, 3, 3), 7.0)
        y, _ = gap_forward(x)
        assert (y == 7.0).all() and y.shape == (1, 2)

    def test_gap_gradient_uniform_spread(self):
        x = RNG.normal(size=(2, 3, 4, 5))
        y, cache = gap_forward(x)
        dy = RNG.normal(size=y.shape)
        dx = gap_backward(dy, cache)
        assert np.allclose(dx, dy[:, :, None, None] / 20.0)
        f = lambda: float((gap_forward(x)[0] * dy).sum())
        assert rel_err(central_diff(f, x), dx) < 1e-6


class TestSoftmaxXent:
    def test_uniform_logits_loss(self):
        loss, _ = softmax_xent(np.zeros((3, 10)), np.array([0, 4, 9]))
        assert abs(loss - np.log(10)) < 1e-12

    def test_saturated_true_class(self):
        logits = np.zeros((1, 10))
        logits[0, 3] = 1000.0
        loss, _ = softmax_xent(logits, np.array([3]))
        assert loss < 1e-9

    def test_gradient_rows_sum_to_zero(self):
        logits = RNG.normal(size=(6, 10))
        labels = RNG.integers(0, 10, size=6)
        _, grad = softmax_xent(logits, labels)
        assert np.abs(grad.sum(axis=1)).max() < 1e-12

    def test_gradient_matches_finite_differences(self):
        logits = RNG.normal(size=(4, 5))
        labels = np.array([0, 2, 4, 1])
        _, grad = softmax_xent(logits, labels)
        f = lambda: softmax_xent(logits, labels)[0]
        assert rel_err(central_diff(f, logits), grad) < 1e-6

    def test_label_out_of_range(self):
        with pytest.raises(LabelOutOfRange):
            softmax_xent(np.zeros((1, 3)), np.array([3]))


class TestSgdMomentum:
    def test_first_step(self):
        p = [np.zeros(1)]
        v = [np.zeros(1)]
        sgd_momentum_step(p, [np.ones(1)], v, lr=0.1, mu=0.9)
        assert np.allclose(v[0], -0.1) and np.allclose(p[0], -0.1)

    def test_second_step_accumulates(self):
        p, v = [np.zeros(1)], [np.zeros(1)]
        sgd_momentum_step(p, [np.ones(1)], v, 0.1, 0.9)
        sgd_momentum_step(p, [np.ones(1)], v, 0.1, 0.9)
        assert np.allclose(v[0], -0.19)

    def test_zero_momentum_is_plain_sgd(self):
        p, v = [np.full(3, 2.0)], [np.zeros(3)]
        g = [np.array([1.0, -2.0, 0.5])]
        sgd_momentum_step(p, g, v, 0.1, 0.0)
        assert np.allclose(p[0], 2.0 - 0.1 * g[0])


class TestPaperNetwork:
    def test_shape_trace(self):
        spec = build_paper_network()
        shapes = spec.trace_shapes(96, 96)
        spatial = [s for s in shapes if len(s) == 3]
        assert [s[1] for s in spatial] == [96, 90, 90, 30, 26, 26, 13, 11, 11, 5, 5]
        assert spatial[-1] == (10, 5, 5)       # 1x1 conv output feeding GAP
        assert spatial[-2] == (512, 5, 5)      # GAP input block 5x5x512-derived
        assert shapes[-1] == (10,)

    def test_first_conv_param_count(self):
        params = init_params(build_paper_network(), seed=0)
        assert params[0]["w"].size + params[0]["b"].size == 96 * 3 * 7 * 7 + 96 == 14208

    def test_zero_image_zero_bias_gives_zero_logits(self):
        spec = build_paper_network()
        params = init_params(spec, seed=1)
        x = np.zeros((1, 3, 96, 96))
        logits, _ = forward(spec, params, x)
        assert logits.shape == (1, 10)
        assert np.allclose(logits, 0.0)

    def test_end_to_end_gradients_micro_net(self):
        spec = NetworkSpec((Conv(4, 3), Relu(), MaxPool(2, 2), Conv(3, 1), GlobalAvgPool()),
                           in_channels=2)
        params = init_params(spec, seed=3)
        x = RNG.normal(size=(2, 2, 8, 8))
        labels = np.array([0, 2])

        def loss_fn():
            logits, _ = forward(spec, params, x)
            return softmax_xent(logits, labels)[0]

        logits, caches = forward(spec, params, x)
        _, dlogits = softmax_xent(logits, labels)
        grads, dx = backward(spec, caches, dlogits)
        for p, g in zip(params, grads):
            assert rel_err(central_diff(loss_fn, p["w"]), g["w"]) < 1e-6
            assert rel_err(central_diff(loss_fn, p["b"]), g["b"]) < 1e-6
        assert rel_err(central_diff(loss_fn, x), dx) < 1e-6


class TestTraining:
    def test_lr_zero_leaves_params(self):
        images, labels = make_blob_dataset(20, seed=0)
        x = preprocess(images)
        spec = build_micro_network()
        params = init_params(spec, seed=5)
        snapshot = [{k: v.copy() for k, v in p.items()} for p in params]
        out, _ = train(spec, x, labels, TrainConfig(learning_rate=0.0, epochs=2, seed=5),
                       params=params)
        for a, b in zip(snapshot, out):
            assert np.array_equal(a["w"], b["w"]) and np.array_equal(a["b"], b["b"])

    def test_same_seed_bit_identical(self):
        images, labels = make_blob_dataset(40, seed=1)
        x = preprocess(images)
        spec = build_micro_network()
        cfg = TrainConfig(epochs=3, seed=9)
        p1, _ = train(spec, x, labels, cfg)
        p2, _ = train(spec, x, labels, cfg)
        for a, b in zip(p1, p2):
            assert np.array_equal(a["w"], b["w"]) and np.array_equal(a["b"], b["b"])

    def test_blob_sanity_fast(self):
        images, labels = make_blob_dataset(60, seed=4)
        x = preprocess(images)
        spec = build_micro_network()
        params, log = train(spec, x, labels, TrainConfig(epochs=10, seed=2))
        assert evaluate(spec, params, x, labels) >= 0.95

    def test_empty_dataset(self):
        spec = build_micro_network()
        with pytest.raises(EmptyDataset):
            train(spec, np.zeros((0, 3, 4, 4)), np.zeros(0, dtype=int), TrainConfig(epochs=1))


class TestEvaluate:
    def test_fraction(self):
        spec = NetworkSpec((Conv(2, 1), GlobalAvgPool()), in_channels=1)
        params = [{"w": np.zeros((2, 1, 1, 1)), "b": np.array([0.0, 1.0])}]
        x = np.zeros((4, 1, 2, 2))
        labels = np.array([1, 1, 0, 0])  # argmax always 1 -> 2 of 4 correct
        assert evaluate(spec, params, x, labels) == 0.5

    def test_all_zero_logits_tie_breaks_to_class_zero(self):
        spec = NetworkSpec((Conv(3, 1), GlobalAvgPool()), in_channels=1)
        params = [{"w": np.zeros((3, 1, 1, 1)), "b": np.zeros(3)}]
        x = np.zeros((6, 1, 2, 2))
        labels = np.array([0, 0, 1, 2, 0, 1])
        assert evaluate(spec, params, x, labels) == 0.5  # class-0 frequency

    def test_random_network_near_chance(self):
        # Monte-Carlo baseline: ~0.1 +/- 0.05 on balanced random labels.
        spec = NetworkSpec((Conv(10, 1), GlobalAvgPool()), in_channels=3)
        params = init_params(spec, seed=12)
        rng = np.random.default_rng(3)
        x = rng.normal(size=(1000, 3, 4, 4))
        labels = np.tile(np.arange(10), 100)
        acc = evaluate(spec, params, x, labels)
        assert abs(acc - 0.1) < 0.05

    def test_empty(self):
        spec = build_micro_network()
        with pytest.raises(EmptyDataset):
            evaluate(spec, init_params(spec, 0), np.zeros((0, 3, 4, 4)), np.zeros(0, dtype=int))


class TestRunExperiment:
    def test_constant_accuracies(self):
        mean, std = run_experiment(TrainConfig(replicate_count=4, seed=0), lambda s: 0.5)
        assert mean == 0.5 and std == 0.0

    def test_population_std(self):
        vals = iter([0.4, 0.6])
        mean, std = run_experiment(TrainConfig(replicate_count=2, seed=0),
                                   lambda s: next(vals))
        assert abs(mean - 0.5) < 1e-12 and abs(std - 0.1) < 1e-12

    def test_single_replicate(self):
        mean, std = run_experiment(TrainConfig(replicate_count=1, seed=0), lambda s: 0.7)
        assert mean == 0.7 and std == 0.0


class TestCheckpointAndConfig:
    def test_weights_round_trip(self, tmp_path):
        spec = build_micro_network()
        params = init_params(spec, seed=8)
        save_weights(tmp_path / "w.bin", params)
        loaded = load_weights(tmp_path / "w.bin")
        for a, b in zip(params, loaded):
            assert np.array_equal(a["w"], b["w"]) and np.array_equal(a["b"], b["b"])

    def test_config_parse(self, tmp_path):
        cfg = tmp_path / "train.cfg"
        cfg.write_text("# comment\nlearning_rate = 0.05\nepochs = 3\n\nseed = 4\n")
        options = parse_config(cfg)
        tc = train_config_from(options)
        assert tc.learning_rate == 0.05 and tc.epochs == 3 and tc.seed == 4

    def test_log_csv(self, tmp_path):
        from ctxaug.convnet import EpochLog
        write_log_csv(tmp_path / "log.csv", [EpochLog(0, 1.5, 0.2, 0.1),
                                             EpochLog(1, 1.0, 0.4, None)])
        lines = (tmp_path / "log.csv").read_text().splitlines()
        assert lines[0] == "epoch,loss,train_acc,test_acc"
        assert lines[1].startswith("0,1.5") and lines[2].endswith(",")
