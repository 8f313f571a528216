"""RNG streams, initializers, MLPs, and LSTM stacks."""

import math

import numpy as np
import pytest

import spanseg.autodiff as ad
from spanseg.autodiff import Parameter, backward, constant
from spanseg.layers import (
    BiLstm,
    CharBiLstm,
    EmbeddingTable,
    Linear,
    LstmCell,
    Mlp,
    Rng,
    xavier_uniform,
)


def sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


class TestRng:
    def test_same_seed_same_stream_reproduces(self):
        a = Rng(42, "init").normal(1.0, (5,))
        b = Rng(42, "init").normal(1.0, (5,))
        assert np.array_equal(a, b)

    def test_streams_are_independent(self):
        a = Rng(42, "init").normal(1.0, (5,))
        b = Rng(42, "dropout").normal(1.0, (5,))
        assert not np.array_equal(a, b)

    def test_seeds_differ(self):
        a = Rng(1, "data").permutation(10)
        b = Rng(2, "data").permutation(10)
        assert not np.array_equal(a, b)

    def test_unknown_stream_rejected(self):
        with pytest.raises(ValueError):
            Rng(0, "nope")

    def test_dropout_mask_values(self):
        mask = Rng(0, "dropout").dropout_mask(0.33, (200,))
        keep = 1.0 / (1.0 - 0.33)
        assert set(np.unique(mask)) <= {0.0, keep}

    def test_dropout_mask_zero_rate(self):
        mask = Rng(0, "dropout").dropout_mask(0.0, (7,))
        assert np.array_equal(mask, np.ones(7))

    def test_dropout_mask_mean_near_one(self):
        mask = Rng(3, "dropout").dropout_mask(0.33, (20000,))
        assert abs(mask.mean() - 1.0) < 0.02

    def test_dropout_rate_validated(self):
        rng = Rng(0, "dropout")
        with pytest.raises(ValueError):
            rng.dropout_mask(1.0, (3,))
        with pytest.raises(ValueError):
            rng.dropout_mask(-0.1, (3,))

    def test_mask_reproducible_for_seed(self):
        a = Rng(9, "dropout").dropout_mask(0.5, (50,))
        b = Rng(9, "dropout").dropout_mask(0.5, (50,))
        assert np.array_equal(a, b)


class TestXavier:
    def test_bounds(self):
        w = xavier_uniform(Rng(0, "init"), (30, 70))
        limit = math.sqrt(6.0 / 100.0)
        assert np.all(np.abs(w) <= limit)
        assert w.shape == (30, 70)


class TestLinear:
    def test_identity(self):
        lin = Linear(Rng(0, "init"), "lin", 3, 3)
        lin.weight.data[:] = np.eye(3)
        out = lin(constant([1.0, 2.0, 3.0]))
        assert np.allclose(out.data, [1, 2, 3])

    def test_parameter_names_and_decay_flags(self):
        lin = Linear(Rng(0, "init"), "lin", 2, 4)
        names = {p.name: p.weight_decay_eligible for p in lin.parameters()}
        assert names == {"lin.weight": True, "lin.bias": False}

    def test_no_bias_variant(self):
        lin = Linear(Rng(0, "init"), "lin", 2, 2, bias=False)
        assert [p.name for p in lin.parameters()] == ["lin.weight"]


class TestMlp:
    def test_relu_identity(self):
        mlp = Mlp(Rng(0, "init"), "mlp", 2, 2, dropout=0.0)
        mlp.linear.weight.data[:] = np.eye(2)
        out = mlp(constant([1.0, -1.0]))
        assert np.array_equal(out.data, [1.0, 0.0])

    def test_eval_mode_deterministic(self):
        mlp = Mlp(Rng(0, "init"), "mlp", 4, 3, dropout=0.33)
        x = constant(np.linspace(-1, 1, 4))
        assert np.array_equal(mlp(x).data, mlp(x).data)

    def test_training_mask_reproducible_under_seed(self):
        mlp = Mlp(Rng(0, "init"), "mlp", 4, 3, dropout=0.33)
        x = constant(np.linspace(-1, 1, 4))
        a = mlp(x, train=True, rng=Rng(5, "dropout")).data
        b = mlp(x, train=True, rng=Rng(5, "dropout")).data
        assert np.array_equal(a, b)

    def test_training_without_rng_rejected(self):
        mlp = Mlp(Rng(0, "init"), "mlp", 2, 2, dropout=0.33)
        with pytest.raises(ValueError):
            mlp(constant([1.0, 1.0]), train=True)


class TestLstmCell:
    def test_hand_computed_step(self):
        cell = LstmCell(Rng(0, "init"), "cell", 1, 1)
        cell.wx.data[:] = [[1.0, 2.0, -1.0, 0.5]]
        cell.wh.data[:] = [[0.5, 0.5, 0.5, 0.5]]
        cell.b.data[:] = [0.1, 0.2, 0.3, 0.4]
        states = cell.run([constant([0.7])])
        # straight-line evaluation of one step from zero states
        i = sigmoid(0.7 * 1.0 + 0.1)
        f = sigmoid(0.7 * 2.0 + 0.2)
        g = math.tanh(0.7 * -1.0 + 0.3)
        o = sigmoid(0.7 * 0.5 + 0.4)
        c = i * g  # f * 0 + i * g
        h = o * math.tanh(c)
        assert states[0].data[0] == pytest.approx(h, abs=1e-12)

    def test_two_steps_use_recurrence(self):
        cell = LstmCell(Rng(1, "init"), "cell", 2, 3)
        xs = [constant([0.5, -0.5]), constant([1.0, 0.0])]
        states = cell.run(xs)
        solo = cell.run([xs[1]])
        assert not np.allclose(states[1].data, solo[0].data)

    def test_zero_weights_zero_states(self):
        cell = LstmCell(Rng(0, "init"), "cell", 2, 3)
        for p in cell.parameters():
            p.data[:] = 0.0
        states = cell.run([constant([1.0, 2.0]), constant([3.0, 4.0])])
        for s in states:
            assert np.array_equal(s.data, np.zeros(3))

    def test_gradients_vs_finite_differences(self):
        cell = LstmCell(Rng(2, "init"), "cell", 2, 2)
        xs_data = [np.array([0.3, -0.7]), np.array([0.9, 0.1]), np.array([-0.2, 0.5])]

        def build():
            states = cell.run([constant(x) for x in xs_data])
            return ad.tsum(ad.mul(states[-1], states[-1]))

        loss = build()
        backward(loss)
        eps = 1e-5
        for p in cell.parameters():
            analytic = p.grad.copy()
            flat = p.data.reshape(-1)
            for i in range(0, flat.size, max(1, flat.size // 6)):
                orig = flat[i]
                flat[i] = orig + eps
                up = build().item()
                flat[i] = orig - eps
                down = build().item()
                flat[i] = orig
                numeric = (up - down) / (2 * eps)
                a = analytic.reshape(-1)[i]
                denom = max(abs(a), abs(numeric), 1e-3)
                assert abs(a - numeric) / denom < 1e-4
            p.zero_grad()


class TestBiLstm:
    def rows(self, rng, count, dim):
        return [constant(rng.normal(0, 1, dim)) for _ in range(count)]

    def test_state_counts_and_dims(self):
        net = BiLstm(Rng(0, "init"), "net", 4, 3, layers=2, dropout=0.0)
        rows = self.rows(np.random.default_rng(0), 5, 4)
        fstates, bstates = net.forward(rows)
        assert len(fstates) == 5 and len(bstates) == 5
        for s in fstates + bstates:
            assert s.shape == (3,)

    def test_minimum_length_enforced(self):
        net = BiLstm(Rng(0, "init"), "net", 2, 2, layers=1, dropout=0.0)
        with pytest.raises(ValueError):
            net.forward(self.rows(np.random.default_rng(0), 2, 2))

    def test_zero_weights_zero_states(self):
        net = BiLstm(Rng(0, "init"), "net", 2, 3, layers=2, dropout=0.0)
        for p in net.parameters():
            p.data[:] = 0.0
        fstates, bstates = net.forward(self.rows(np.random.default_rng(1), 4, 2))
        for s in fstates + bstates:
            assert np.array_equal(s.data, np.zeros(3))

    def test_reversal_swaps_directions_with_tied_weights(self):
        net = BiLstm(Rng(3, "init"), "net", 3, 4, layers=1, dropout=0.0)
        fwd, bwd = net.cells[0]
        bwd.wx.data[:] = fwd.wx.data
        bwd.wh.data[:] = fwd.wh.data
        bwd.b.data[:] = fwd.b.data
        rows = self.rows(np.random.default_rng(2), 5, 3)
        fstates, bstates = net.forward(rows)
        rf, rb = net.forward(rows[::-1])
        for p in range(5):
            assert np.allclose(rb[p].data, fstates[4 - p].data, atol=1e-12)
            assert np.allclose(rf[p].data, bstates[4 - p].data, atol=1e-12)

    def test_training_dropout_needs_rng_only_beyond_first_layer(self):
        rows = self.rows(np.random.default_rng(3), 4, 2)
        one = BiLstm(Rng(0, "init"), "one", 2, 2, layers=1, dropout=0.33)
        one.forward(rows, train=True, rng=None)  # no inter-layer mask needed
        two = BiLstm(Rng(0, "init"), "two", 2, 2, layers=2, dropout=0.33)
        with pytest.raises(ValueError):
            two.forward(rows, train=True, rng=None)

    def test_eval_deterministic(self):
        net = BiLstm(Rng(4, "init"), "net", 3, 3, layers=3, dropout=0.33)
        rows = self.rows(np.random.default_rng(4), 4, 3)
        a = [s.data for s in net.forward(rows)[0]]
        b = [s.data for s in net.forward(rows)[0]]
        for x, y in zip(a, b):
            assert np.array_equal(x, y)

    def test_parameter_count(self):
        net = BiLstm(Rng(0, "init"), "net", 4, 3, layers=2, dropout=0.0)
        # 2 layers x 2 directions x (wx, wh, b)
        assert len(net.parameters()) == 12
        assert len({p.name for p in net.parameters()}) == 12


class TestCharBiLstm:
    def test_summary_shape(self):
        net = CharBiLstm(Rng(0, "init"), "chars", 5, 6)
        xs = [constant(np.ones(5)) for _ in range(3)]
        assert net.summary(xs).shape == (6,)

    def test_odd_summary_dim_rejected(self):
        with pytest.raises(ValueError):
            CharBiLstm(Rng(0, "init"), "chars", 5, 7)

    def test_empty_sequence_rejected(self):
        net = CharBiLstm(Rng(0, "init"), "chars", 2, 4)
        with pytest.raises(ValueError):
            net.summary([])

    def test_summary_is_order_sensitive(self):
        net = CharBiLstm(Rng(1, "init"), "chars", 2, 4)
        a = constant([1.0, 0.0])
        b = constant([0.0, 1.0])
        assert not np.allclose(net.summary([a, b]).data, net.summary([b, a]).data)


class TestEmbeddingTable:
    def test_init_scale_and_lookup(self):
        table = EmbeddingTable(Rng(0, "init"), "emb", 10, 4)
        assert table.table.data.shape == (10, 4)
        assert np.abs(table.table.data).max() < 0.1  # normal(0, 0.01) draws
        assert not table.table.weight_decay_eligible
        out = table.rows([3, 3, 1])
        assert np.array_equal(out.data[0], out.data[1])
        assert np.array_equal(out.data[2], table.table.data[1])

    def test_lookup_gradient_scatters(self):
        table = EmbeddingTable(Rng(0, "init"), "emb", 4, 2)
        out = table.rows([1, 1])
        backward(ad.tsum(out))
        expect = np.zeros((4, 2))
        expect[1] = 2.0
        assert np.array_equal(table.table.grad, expect)
