import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import central_differences, relative_error
from sda.errors import DimensionError, DivergedError, ValidationError
from sda.nn import NetworkParams, backward, forward, init_params, predict, sgd_epoch, stack, zeros_like_params


def make_net(weights, biases):
    weights = [np.array(W, float) for W in weights]
    sizes = [weights[0].shape[0]] + [W.shape[1] for W in weights]
    return NetworkParams(tuple(sizes), weights, [np.array(b, float) for b in biases])


def random_net(rng, sizes):
    return NetworkParams(
        tuple(sizes),
        [rng.normal(size=(a, b)) for a, b in zip(sizes[:-1], sizes[1:])],
        [rng.normal(size=b) for b in sizes[1:]],
    )


def away_from_kinks(net, rng, n, margin=1e-3):
    while True:
        X = rng.normal(size=(n, net.n_inputs))
        tr = forward(net, X)
        if all(np.min(np.abs(z)) > margin for z in tr.pre[:-1]):
            return X


class TestForward:
    def test_identity_hidden_layer(self):
        net = make_net([np.eye(2), [[1.0], [1.0]]], [np.zeros(2), [0.0]])
        tr = forward(net, np.array([[1.0, -2.0]]))
        np.testing.assert_array_equal(tr.activations[1], [[1.0, 0.0]])
        assert tr.output[0] == 1.0

    def test_zero_weights(self, rng):
        net = zeros_like_params(init_params(4, [5, 3], rng))
        np.testing.assert_array_equal(predict(net, rng.normal(size=(7, 4))), 0.0)

    def test_two_layer_hand_evaluation(self):
        # 1 input -> 2 hidden -> 1 output
        net = make_net([[[1.0, -1.0]], [[1.0], [1.0]]], [[0.5, 0.5], [0.0]])
        tr = forward(net, np.array([[1.0]]))
        np.testing.assert_allclose(tr.activations[1], [[1.5, 0.0]])
        assert tr.output[0] == pytest.approx(1.5)

    def test_relu_outputs_nonnegative(self, rng):
        net = random_net(rng, [3, 6, 4, 1])
        tr = forward(net, rng.normal(size=(20, 3)))
        assert len(tr.pre) == 3
        assert all((a >= 0).all() for a in tr.activations[1:])

    def test_zero_rate_train_mode_matches_eval(self, rng):
        net = random_net(rng, [3, 6, 4, 1])
        X = rng.normal(size=(10, 3))
        train = forward(net, X, [0.0, 0.0], np.random.default_rng(1), train_mode=True)
        np.testing.assert_array_equal(train.output, predict(net, X))

    def test_inverted_dropout_preserves_mean(self):
        net = make_net([np.ones((1, 1)), np.ones((1, 1))], [np.zeros(1), np.zeros(1)])
        X = np.ones((200_000, 1))
        out = forward(net, X, [0.4], np.random.default_rng(3), train_mode=True).output
        assert set(np.unique(np.round(out, 12))) <= {0.0, round(1 / 0.6, 12)}
        assert abs(out.mean() - 1.0) < 4 * np.sqrt(0.4 / 0.6 / len(out))

    def test_errors(self, rng):
        net = init_params(3, [4], rng)
        with pytest.raises(DimensionError):
            forward(net, np.ones((2, 4)))
        with pytest.raises(ValidationError):
            forward(net, np.array([[1.0, np.nan, 0.0]]))
        with pytest.raises(DimensionError):
            forward(net, np.ones((2, 3)), [0.1, 0.2])

    def test_init_bounds(self, rng):
        net = init_params(10, [64, 32], rng)
        assert net.layer_sizes == (10, 64, 32, 1)
        for W in net.weights:
            assert np.abs(W).max() <= np.sqrt(6 / sum(W.shape))
        assert all((b == 0).all() for b in net.biases)

    def test_bad_shapes_rejected(self):
        with pytest.raises(DimensionError):
            NetworkParams((2, 3, 1), [np.ones((2, 3)), np.ones((2, 1))], [np.zeros(3), np.zeros(1)])
        with pytest.raises(DimensionError):
            NetworkParams((2, 2), [np.ones((2, 2))], [np.zeros(2)])


class TestBackward:
    def test_zero_residual(self, rng):
        net = random_net(rng, [3, 5, 1])
        tr = forward(net, rng.normal(size=(6, 3)))
        g = backward(net, tr, np.zeros(6))
        assert all((W == 0).all() for W in g.weights)

    def test_weight_linearity(self, rng):
        net = random_net(rng, [3, 5, 1])
        tr = forward(net, rng.normal(size=(6, 3)))
        r = rng.normal(size=6)
        g1 = backward(net, tr, r)
        g3 = backward(net, tr, r, np.full(6, 3.0))
        for a, b in zip(g1.weights + g1.biases, g3.weights + g3.biases):
            np.testing.assert_allclose(3.0 * a, b, rtol=1e-13, atol=1e-15)

    def test_matches_finite_differences(self, rng):
        net = random_net(rng, [3, 4, 3, 1])
        X = away_from_kinks(net, rng, 8)
        t = rng.normal(size=8)
        w = rng.uniform(0.1, 2.0, size=8)

        def loss():
            return float(np.sum(w * (predict(net, X) - t) ** 2))

        tr = forward(net, X)
        g = backward(net, tr, 2 * (tr.output - t), w)
        fd = central_differences(loss, net.weights + net.biases)
        for a, b in zip(g.weights + g.biases, fd):
            assert relative_error(a, b) < 1e-4

    def test_dropout_masks_respected(self, rng):
        net = random_net(rng, [2, 5, 1])
        X = away_from_kinks(net, rng, 6)

        def loss():
            out = forward(net, X, [0.5], np.random.default_rng(9), train_mode=True).output
            return float(np.sum(out ** 2))

        tr = forward(net, X, [0.5], np.random.default_rng(9), train_mode=True)
        g = backward(net, tr, 2 * tr.output)
        fd = central_differences(loss, net.weights + net.biases)
        for a, b in zip(g.weights + g.biases, fd):
            assert relative_error(a, b) < 1e-4

    def test_shape_errors(self, rng):
        net = random_net(rng, [3, 5, 1])
        tr = forward(net, rng.normal(size=(6, 3)))
        with pytest.raises(DimensionError):
            backward(net, tr, np.zeros(5))
        with pytest.raises(DimensionError):
            backward(net, tr, np.zeros(6), np.ones(4))


class TestSgdEpoch:
    def test_zero_lr_is_noop(self, rng):
        net = init_params(3, [4], rng)
        X = rng.normal(size=(10, 3))
        out, _ = sgd_epoch(net, X, rng.normal(size=10), lr=0.0, batch_size=3, rng=np.random.default_rng(0))
        for a, b in zip(net.weights, out.weights):
            np.testing.assert_array_equal(a, b)

    def test_linear_full_batch_step(self):
        # f(x) = w x + b, loss mean (f - t)^2: dL/dw = 2 mean((f - t) x), dL/db = 2 mean(f - t)
        net = make_net([[[0.5]]], [[0.1]])
        X = np.array([[1.0], [2.0], [3.0]])
        t = np.array([1.0, 3.0, 2.0])
        r = 0.5 * X[:, 0] + 0.1 - t
        gw, gb = 2 * np.mean(r * X[:, 0]), 2 * np.mean(r)
        out, loss = sgd_epoch(net, X, t, lr=0.1, batch_size=3, rng=np.random.default_rng(0))
        assert out.weights[0][0, 0] == pytest.approx(0.5 - 0.1 * gw, abs=1e-15)
        assert out.biases[0][0] == pytest.approx(0.1 - 0.1 * gb, abs=1e-15)
        assert loss == pytest.approx(np.mean(r ** 2))

    def test_input_not_mutated(self, rng):
        net = init_params(3, [4], rng)
        before = net.copy()
        sgd_epoch(net, rng.normal(size=(10, 3)), rng.normal(size=10), lr=0.1, batch_size=3,
                  rng=np.random.default_rng(0))
        for a, b in zip(net.weights, before.weights):
            np.testing.assert_array_equal(a, b)

    def test_reproducible(self, rng):
        net = init_params(3, [8, 4], rng)
        X, t = rng.normal(size=(50, 3)), rng.normal(size=50)
        runs = [
            sgd_epoch(net, X, t, lr=0.05, batch_size=7, rng=np.random.default_rng(11), dropout_rates=[0.3, 0.1])
            for _ in range(2)
        ]
        for a, b in zip(runs[0][0].weights, runs[1][0].weights):
            np.testing.assert_array_equal(a, b)
        assert runs[0][1] == runs[1][1]

    def test_finite_on_friedman(self):
        from sda.data import gen_friedman
        ds = gen_friedman(300, 10, 1.0, np.random.default_rng(0))
        net = init_params(10, [64], np.random.default_rng(1))
        out, loss = sgd_epoch(net, ds.X, ds.y, lr=1e-3, batch_size=32, rng=np.random.default_rng(2))
        assert out.is_finite() and np.isfinite(loss)

    def test_divergence_reports_epoch(self):
        net = make_net([[[1.0]]], [[0.0]])
        X = np.array([[1e200], [1e200]])
        with pytest.raises(DivergedError) as err, np.errstate(over="ignore", invalid="ignore"):
            sgd_epoch(net, X, np.zeros(2), lr=1.0, batch_size=2, rng=np.random.default_rng(0), epoch=7)
        assert err.value.epoch == 7

    def test_custom_loss(self, rng):
        net = init_params(2, [3], rng)
        X, t = rng.normal(size=(8, 2)), rng.normal(size=8)

        def half_squared(f, y):
            return 0.5 * (f - y) ** 2, f - y

        a, _ = sgd_epoch(net, X, t, lr=0.2, batch_size=8, rng=np.random.default_rng(0), loss=half_squared)
        b, _ = sgd_epoch(net, X, t, lr=0.1, batch_size=8, rng=np.random.default_rng(0))
        for u, v in zip(a.weights, b.weights):
            np.testing.assert_allclose(u, v, rtol=1e-12)

    def test_errors(self, rng):
        net = init_params(2, [3], rng)
        with pytest.raises(ValidationError):
            sgd_epoch(net, np.zeros((0, 2)), np.zeros(0), lr=0.1, batch_size=1, rng=rng)
        with pytest.raises(ValidationError):
            sgd_epoch(net, np.zeros((3, 2)), np.zeros(3), lr=0.1, batch_size=0, rng=rng)


class TestStack:
    def test_identity(self):
        X, y = np.arange(6.0).reshape(3, 2), np.arange(3.0)
        S = stack(X, y, 1)
        np.testing.assert_array_equal(S.X, X)
        np.testing.assert_array_equal(S.y, y)

    def test_block_layout(self):
        S = stack(np.array([[1.0], [2.0]]), np.array([10.0, 20.0]), 3)
        np.testing.assert_array_equal(S.y, [10, 20, 10, 20, 10, 20])

    def test_ten_copies(self):
        S = stack(np.zeros((7, 2)), np.zeros(7), 10)
        assert S.y.shape == (70,) and S.X.shape == (70, 2)

    def test_zero_copies(self):
        with pytest.raises(ValidationError):
            stack(np.zeros((2, 1)), np.zeros(2), 0)

    @given(n=st.integers(1, 20), p=st.integers(1, 4), J=st.integers(1, 12), seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_blocks_recover_originals(self, n, p, J, seed):
        rng = np.random.default_rng(seed)
        X, y = rng.normal(size=(n, p)), rng.normal(size=n)
        S = stack(X, y, J)
        assert S.y.shape[0] % J == 0
        for j in range(J):
            Xj, yj = S.block(j)
            assert Xj.tobytes() == X.tobytes() and yj.tobytes() == y.tobytes()
