import json
import math

import numpy as np
import pytest

from safempc.bounds import Box
from safempc.mlp import (
    Dataset,
    DimensionError,
    MlpNetwork,
    ModelFormatError,
    TrainingDivergenceError,
    evaluate,
    forward,
    gradient_check,
    init_network,
    lipschitz_upper_bound,
    load_model,
    mse,
    save_model,
    train,
)
from safempc.simulate import DEFAULT_STATE_BOX, DEFAULT_U_BOX, gen_dataset
from safempc.util import named_rng


def _zero_net(mx=4, mu=2, hidden=(8,)):
    dims = [mx + mu, *hidden, mx]
    ws = tuple(np.zeros((o, i)) for i, o in zip(dims[:-1], dims[1:]))
    bs = tuple(np.zeros(o) for o in dims[1:])
    return MlpNetwork(ws, bs, mx, mu)


class TestForward:
    def test_zero_net_maps_to_zero(self):
        net = _zero_net()
        xdot, _ = forward(net, np.array([1.0, -2.0, 3.0, 0.5]), np.array([4.0, -4.0]))
        assert np.all(xdot == 0.0)

    def test_relu_clips_negative_input(self):
        # identity layers, no controls: ReLU kills an all-negative input
        eye = np.eye(3)
        net = MlpNetwork((eye.copy(), eye.copy()), (np.zeros(3), np.zeros(3)), 3, 0)
        xdot, trace = forward(net, -np.ones(3), np.zeros(0))
        assert np.all(xdot == 0.0)
        assert np.all(trace.post[0] == 0.0)

    def test_matches_hand_rolled_chain(self):
        net = init_network(4, 2, [8], seed=42)
        rng = np.random.default_rng(1)
        x, u = rng.normal(size=4), rng.normal(size=2)
        got, trace = forward(net, x, u)

        # recompute with plain loops, no shared code path
        z = list(x) + list(u)
        for li, (w, b) in enumerate(zip(net.weights, net.biases)):
            nxt = []
            for row in range(w.shape[0]):
                acc = b[row]
                for col in range(w.shape[1]):
                    acc += w[row, col] * z[col]
                if li < net.layer_count - 1:
                    acc = max(acc, 0.0)
                nxt.append(acc)
            z = nxt
        assert np.allclose(got, z, rtol=0, atol=1e-12)

    def test_batch_matches_single(self):
        net = init_network(4, 2, [6, 6], seed=0)
        rng = np.random.default_rng(2)
        xs, us = rng.normal(size=(5, 4)), rng.normal(size=(5, 2))
        batch = evaluate(net, xs, us)
        for k in range(5):
            single, _ = forward(net, xs[k], us[k])
            assert np.allclose(batch[k], single, atol=1e-12)

    def test_dimension_mismatch_rejected(self):
        net = init_network(4, 2, [8], seed=0)
        with pytest.raises(DimensionError):
            forward(net, np.zeros(3), np.zeros(2))

    def test_flipping_preactivation_flips_exactly_that_node(self):
        net = init_network(4, 2, [10], seed=9)
        x, u = np.full(4, 0.3), np.full(2, -0.2)
        _, trace = forward(net, x, u)
        pre = trace.pre[0]
        j = int(np.argmax(np.abs(pre)))
        biases = [b.copy() for b in net.biases]
        biases[0][j] -= 2.0 * pre[j]
        tweaked = MlpNetwork(net.weights, tuple(biases), 4, 2)
        _, trace2 = forward(tweaked, x, u)
        same_layer_active = (trace.pre[0] > 0), (trace2.pre[0] > 0)
        flips = same_layer_active[0] != same_layer_active[1]
        assert flips[j] and flips.sum() == 1


class TestTrain:
    def test_self_consistent_data_reduces_mse(self):
        net = init_network(4, 2, [8], seed=1)
        rng = np.random.default_rng(5)
        xs, us = rng.normal(size=(200, 4)), rng.normal(size=(200, 2))
        data = Dataset(xs, us, evaluate(net, xs, us) + 0.01 * rng.normal(size=(200, 4)))
        start = init_network(4, 2, [8], seed=2)
        out = train(start, data, epochs=50, batch_size=64, learning_rate=1e-2, seed=0)
        assert mse(out, data) < mse(start, data)

    def test_learns_linear_map(self):
        # closed-form check: the data is exactly linear, so least squares
        # has zero residual and the net should get very close too
        rng = np.random.default_rng(8)
        A = rng.normal(size=(3, 5)) * 0.5
        xs, us = rng.uniform(-1, 1, (1500, 3)), rng.uniform(-1, 1, (1500, 2))
        inputs = np.hstack([xs, us])
        data = Dataset(xs, us, inputs @ A.T)
        _, residual, _, _ = np.linalg.lstsq(inputs, data.derivs, rcond=None)
        assert np.all(residual < 1e-20)
        net = init_network(3, 2, [32], seed=4)
        net = train(net, data, epochs=800, batch_size=128, learning_rate=5e-3, seed=1)
        net = train(net, data, epochs=400, batch_size=128, learning_rate=5e-4, seed=2)
        assert mse(net, data) < 1e-3

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(0)
        xs, us = rng.normal(size=(100, 4)), rng.normal(size=(100, 2))
        data = Dataset(xs, us, rng.normal(size=(100, 4)))
        a = train(init_network(4, 2, [6], seed=3), data, epochs=20, seed=7)
        b = train(init_network(4, 2, [6], seed=3), data, epochs=20, seed=7)
        assert all(np.array_equal(w1, w2) for w1, w2 in zip(a.weights, b.weights))
        assert all(np.array_equal(b1, b2) for b1, b2 in zip(a.biases, b.biases))

    def test_empty_dataset_rejected(self):
        net = init_network(4, 2, [4], seed=0)
        data = Dataset(np.zeros((0, 4)), np.zeros((0, 2)), np.zeros((0, 4)))
        with pytest.raises(ValueError):
            train(net, data)

    def test_divergence_reports_epoch(self):
        rng = np.random.default_rng(0)
        xs, us = rng.normal(size=(64, 4)), rng.normal(size=(64, 2))
        data = Dataset(xs, us, 1e3 * rng.normal(size=(64, 4)))
        net = init_network(4, 2, [8], seed=0)
        with pytest.raises(TrainingDivergenceError) as err:
            train(net, data, epochs=50, batch_size=64, learning_rate=1e12, seed=0)
        assert err.value.epoch >= 0


class TestGradientCheck:
    def test_zero_everything_is_exact(self):
        net = _zero_net()
        data = Dataset(np.zeros((4, 4)), np.zeros((4, 2)), np.zeros((4, 4)))
        assert gradient_check(net, data, 1e-5) == 0.0

    def test_small_net_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        net = init_network(4, 2, [10], seed=17)
        data = Dataset(rng.normal(size=(12, 4)), rng.normal(size=(12, 2)),
                       rng.normal(size=(12, 4)))
        assert gradient_check(net, data, 1e-5) <= 1e-5

    def test_epsilon_must_be_positive(self):
        net = _zero_net()
        data = Dataset(np.zeros((1, 4)), np.zeros((1, 2)), np.zeros((1, 4)))
        with pytest.raises(ValueError):
            gradient_check(net, data, 0.0)


class TestSerialization:
    def test_round_trip_is_byte_identical(self, tmp_path):
        net = init_network(4, 2, [13, 7], seed=99)
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        save_model(net, p1)
        save_model(load_model(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bias_length_error_names_layer(self, tmp_path):
        net = init_network(4, 2, [5], seed=0)
        path = tmp_path / "m.json"
        save_model(net, path)
        doc = json.loads(path.read_text())
        doc["layers"][1]["bias"] = doc["layers"][1]["bias"][:-1]
        path.write_text(json.dumps(doc))
        with pytest.raises(ModelFormatError, match="layer 1"):
            load_model(path)

    def test_garbage_is_a_parse_error(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("{not json")
        with pytest.raises(ModelFormatError):
            load_model(path)

    def test_three_layer_fifty_hidden_dims(self, tmp_path):
        net = init_network(4, 2, [50, 50], seed=1)
        path = tmp_path / "m.json"
        save_model(net, path)
        back = load_model(path)
        assert back.layer_count == 3
        assert back.input_dim == 6 and back.state_dim == 4
        assert back.hidden_widths() == (50, 50)


class TestLipschitz:
    def test_zero_net(self):
        assert lipschitz_upper_bound(_zero_net()) == 0.0

    def test_scaled_identity_beats_frobenius(self):
        w = 2.0 * np.eye(6)
        net = MlpNetwork((w,), (np.zeros(6),), 6, 0)
        k = lipschitz_upper_bound(net)
        assert abs(k - 2.0) < 1e-9  # spectral norm, not 2*sqrt(6)
        assert k < np.linalg.norm(w)

    def test_bound_dominates_sampled_quotients(self):
        net = init_network(4, 2, [12, 12], seed=5)
        k = lipschitz_upper_bound(net)
        rng = np.random.default_rng(11)
        a = rng.uniform(-2, 2, size=(10_000, 6))
        b = rng.uniform(-2, 2, size=(10_000, 6))
        fa = evaluate(net, a[:, :4], a[:, 4:])
        fb = evaluate(net, b[:, :4], b[:, 4:])
        quot = np.linalg.norm(fa - fb, axis=1) / np.linalg.norm(a - b, axis=1)
        assert quot.max() <= k + 1e-9

    def test_forward_is_k_lipschitz_on_samples(self):
        net = init_network(4, 2, [9], seed=2)
        k = lipschitz_upper_bound(net)
        rng = np.random.default_rng(4)
        for _ in range(200):
            a, b = rng.normal(size=6), rng.normal(size=6)
            fa = evaluate(net, a[:4], a[4:])
            fb = evaluate(net, b[:4], b[4:])
            assert np.linalg.norm(fa - fb) <= k * np.linalg.norm(a - b) + 1e-9


class TestDatasetCsv:
    def test_round_trip(self, tmp_path):
        rng = named_rng(0, "test", "csv")
        ds = gen_dataset(50, DEFAULT_STATE_BOX, DEFAULT_U_BOX, rng)
        path = tmp_path / "d.csv"
        ds.to_csv(path)
        back = Dataset.from_csv(path)
        assert np.array_equal(back.states, ds.states)
        assert np.array_equal(back.controls, ds.controls)
        assert np.array_equal(back.derivs, ds.derivs)
        header = path.read_text().splitlines()[0]
        assert header == "x0,x1,x2,x3,u0,u1,xdot0,xdot1,xdot2,xdot3"
