"""Fusion network, training loop, metrics and the Dempster-Shafer baseline."""

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lifefuse.dsp import make_windows, window_arrays
from lifefuse.errors import ConflictError, InvalidArgumentError, NumericalFailure
from lifefuse.fusion import (
    VACUOUS,
    FusionConfig,
    FusionNetwork,
    MassFunction,
    TrainingHistory,
    chronological_split,
    combine_pair,
    ds_combine,
    ds_fuse_probabilities,
    evaluate,
    fusion_forward,
    load_fusion_checkpoint,
    preset,
    probability_to_mass,
    roc_auc,
    save_fusion_checkpoint,
    threshold_metrics,
    train,
)
from lifefuse.neural import grad_check
from lifefuse.simulate import scenario, simulate_probability_streams

TINY = dict(G=8, conv_channels=3, branch_hidden=4, fusion_hidden_1=5, fusion_hidden_2=4,
            dense_widths=[3], branch_lstm_layers=2)


def tiny(**kw):
    return FusionConfig(**{**TINY, **kw})


def _params(net):
    return {name: p.copy() for name, p, _ in net.named_parameters()}


class TestConfig:
    def test_g_relative_defaults(self):
        cfg = FusionConfig(G=64)
        assert cfg.dense_widths == [128, 64, 32]
        assert (cfg.branch_hidden, cfg.fusion_hidden_1, cfg.fusion_hidden_2) == (64, 192, 128)

    def test_experiment_preset(self):
        cfg = preset("paper-exp")
        assert cfg.dense_widths == [64, 32, 16] and cfg.loss == "mse"

    def test_published_hyperparameters_are_defaults(self):
        cfg = FusionConfig()
        assert (cfg.H, cfg.conv_kernel, cfg.keep_prob, cfg.branch_lstm_layers) == (5, 3, 0.8, 3)
        assert (cfg.epochs, cfg.batch) == (20, 16)

    @pytest.mark.parametrize("kw,stage", [
        ({"dense_widths": [8, 8]}, "dense_widths"), ({"conv_kernel": 4}, "conv_kernel"),
        ({"G": 4}, "G"), ({"keep_prob": 0.0}, "keep_prob"), ({"H": 4}, "H"),
        ({"sensor_weights": [1.0, 2.0, 1.0]}, "sensor_weights"), ({"loss": "hinge"}, "loss"),
    ])
    def test_invalid_names_stage(self, kw, stage):
        with pytest.raises(InvalidArgumentError, match=stage):
            FusionConfig(**kw)

    def test_unknown_preset(self):
        with pytest.raises(InvalidArgumentError):
            preset("huge")

    def test_derive_rescales_widths(self):
        assert FusionConfig(G=64).derive(G=32).dense_widths == [64, 32, 16]

    def test_dict_round_trip(self):
        cfg = preset("compact", seed=3)
        assert FusionConfig.from_dict(cfg.to_dict()) == cfg


class TestNetwork:
    def test_same_seed_same_parameters(self):
        a, b = _params(FusionNetwork(tiny(seed=5))), _params(FusionNetwork(tiny(seed=5)))
        assert all(np.array_equal(a[k], b[k]) for k in a)
        c = _params(FusionNetwork(tiny(seed=6)))
        assert any(not np.array_equal(a[k], c[k]) for k in a)

    def test_parameter_count_of_default(self):
        assert FusionNetwork(FusionConfig()).parameter_count() == 747_601

    def test_time_steps(self):
        assert FusionNetwork(tiny(conv_kernel=3)).time_steps == 6

    @given(st.integers(0, 2**31 - 1))
    def test_output_in_open_unit_interval(self, seed):
        rng = np.random.default_rng(seed)
        p = FusionNetwork(tiny(seed=seed % 7)).forward(rng.random((4, 3, 2, 8)))
        assert p.shape == (4,) and np.all((p > 0) & (p < 1))

    def test_eval_deterministic_and_order_free(self, rng):
        net = FusionNetwork(tiny())
        x = rng.random((6, 3, 2, 8))
        first = net.forward(x)
        assert np.array_equal(first, net.forward(x))
        perm = rng.permutation(6)
        assert np.allclose(net.forward(x[perm]), first[perm], atol=1e-14)

    def test_single_sample_forward(self, rng):
        net = FusionNetwork(tiny())
        x = rng.random((3, 2, 8))
        assert fusion_forward(net, x) == pytest.approx(net.forward(x[None])[0])

    def test_shape_mismatch(self, rng):
        with pytest.raises(InvalidArgumentError):
            FusionNetwork(tiny()).forward(rng.random((2, 3, 2, 9)))

    @pytest.mark.parametrize("branch", [0, 1, 2])
    def test_zero_weight_masks_branch(self, rng, branch):
        weights = [1.0, 1.0, 1.0]
        weights[branch] = 0.0
        net = FusionNetwork(tiny(sensor_weights=weights))
        x = rng.random((5, 3, 2, 8))
        y = x.copy()
        y[:, branch] = rng.random((5, 2, 8))
        assert np.array_equal(net.forward(x), net.forward(y))

    def test_half_uwb_sample_differs_only_by_scaling(self, rng):
        x = rng.random((1, 3, 2, 8))
        x[:, 0] = 0.5
        on, off = FusionNetwork(tiny()), FusionNetwork(tiny(sensor_weights=[0, 1, 1]))
        # 0.5 maps to a zero input, but the branch biases still produce a feature map
        assert on.forward(x)[0] != off.forward(x)[0]

    def test_full_network_gradient(self, rng):
        # deep-stack entries reach ~1e-9, where eps=1e-6 leaves ~1e-3 of round-off
        net = FusionNetwork(tiny(keep_prob=1.0))
        assert grad_check(net, rng.random((2, 3, 2, 8)), eps=1e-4) < 1e-4

    def test_checkpoint_round_trip(self, tmp_path, rng):
        net = FusionNetwork(tiny(seed=2))
        path = save_fusion_checkpoint(net, tmp_path / "f.ckpt")
        back = load_fusion_checkpoint(path)
        assert back.cfg == net.cfg
        # parameters are stored as float32
        for (name, a, _), (_, b, _) in zip(net.named_parameters(), back.named_parameters()):
            assert np.array_equal(a.astype(np.float32), b), name
        x = rng.random((3, 3, 2, 8))
        assert np.allclose(back.forward(x), net.forward(x), atol=1e-6)


def _constant_label_data(n, label, rng):
    X = rng.random((n, 3, 2, 8))
    return X, np.full(n, float(label)), np.ones(n)


class TestTraining:
    @pytest.mark.parametrize("label", [0, 1])
    def test_identical_labels_fit_quickly(self, rng, label):
        cfg = tiny(epochs=5, learning_rate=0.03, keep_prob=1.0)
        _, hist = train(FusionNetwork(cfg), _constant_label_data(200, label, rng), cfg,
                        split=(np.arange(160), np.arange(160, 200)))
        assert len(hist.train_loss) == 5
        assert hist.train_loss[-1] < 0.05

    def test_bit_reproducible(self, rng):
        s = simulate_probability_streams(scenario("standard", duration=300, seed=1))
        data = window_arrays(s, 8)[:2]
        data = (*data, np.ones(len(data[1])))
        cfg = tiny(epochs=2)
        _, h1 = train(FusionNetwork(cfg), data, cfg)
        _, h2 = train(FusionNetwork(cfg), data, cfg)
        assert h1.rows() == h2.rows()

    def test_nonfinite_loss_aborts_with_location(self, rng):
        X, y, w = _constant_label_data(64, 1, rng)
        w[:] = np.nan
        cfg = tiny(epochs=1)
        with pytest.raises(NumericalFailure, match="epoch 1, batch 0") as info:
            train(FusionNetwork(cfg), (X, y, w), cfg, split=(np.arange(48), np.arange(48, 64)))
        assert info.value.where == (1, 0)

    def test_too_few_samples(self, rng):
        cfg = tiny()
        with pytest.raises(InvalidArgumentError):
            train(FusionNetwork(cfg), _constant_label_data(20, 1, rng), cfg,
                  split=(np.arange(16), np.arange(16, 20)))

    def test_accepts_fusion_samples(self):
        s = simulate_probability_streams(scenario("standard", duration=200, seed=2))
        cfg = tiny(epochs=1)
        _, hist = train(FusionNetwork(cfg), make_windows(s, 8), cfg)
        assert hist.epochs == [1]

    def test_history_csv_round_trip(self, tmp_path):
        h = TrainingHistory()
        h.append(1, 0.5, 0.6)
        h.append(2, 0.25, 0.375)
        back = TrainingHistory.from_csv(h.to_csv(tmp_path / "h.csv"))
        assert back.rows() == h.rows()
        assert (tmp_path / "h.csv").read_text().splitlines()[0] == "epoch,train_loss,test_loss"


class TestSplit:
    def test_gap_excised(self):
        tr, te = chronological_split(100, 0.8, gap=8)
        assert tr.tolist() == list(range(80)) and te.tolist() == list(range(88, 100))

    def test_too_small(self):
        with pytest.raises(InvalidArgumentError):
            chronological_split(10, 0.8, gap=5)


class TestMetrics:
    def test_perfect(self, rng):
        y = rng.integers(0, 2, 100)
        y[:2] = [0, 1]
        m = threshold_metrics(y.astype(float), y)
        assert m["accuracy"] == 1 and roc_auc(y.astype(float), y) == 1

    def test_constant_half(self):
        y = np.r_[np.zeros(50), np.ones(50)]
        p = np.full(100, 0.5)
        assert roc_auc(p, y) == 0.5
        assert threshold_metrics(p, y) == {"accuracy": 0.5, "precision": 0.0, "recall": 0.0}

    def test_random_scores(self):
        rng = np.random.default_rng(0)
        y = np.r_[np.zeros(5000), np.ones(5000)]
        assert abs(roc_auc(rng.random(10000), y) - 0.5) < 0.03

    def test_single_class_auc_is_nan(self):
        assert np.isnan(roc_auc([0.2, 0.9], [1, 1]))

    @given(st.lists(st.tuples(st.integers(0, 5), st.booleans()), min_size=2, max_size=40))
    def test_auc_equals_pair_count(self, rows):
        s, y = (np.array(c) for c in zip(*rows))
        pos, neg = s[y], s[~y]
        if not len(pos) or not len(neg):
            return
        # Mann-Whitney statistic: fraction of (pos, neg) pairs ordered correctly, ties half
        want = np.mean([1.0 if a > b else 0.5 if a == b else 0.0
                        for a, b in itertools.product(pos, neg)])
        assert roc_auc(s.astype(float), y) == pytest.approx(want, abs=1e-12)

    def test_evaluate_counts(self, rng):
        net = FusionNetwork(tiny())
        X = rng.random((30, 3, 2, 8))
        y = np.r_[np.zeros(15), np.ones(15)]
        m = evaluate(net, (X, y, np.ones(30)))
        assert m.n == 30 and m.predictions.shape == (30,) and m.labels.tolist() == y.tolist()
        assert 0 <= m.accuracy <= 1 and 0 <= m.roc_auc <= 1

    def test_evaluate_empty(self):
        with pytest.raises(InvalidArgumentError):
            evaluate(FusionNetwork(tiny()), (np.zeros((0, 3, 2, 8)), np.zeros(0), np.zeros(0)))


masses = st.tuples(st.floats(0, 1), st.floats(0, 1), st.floats(0.01, 1)).map(
    lambda t: MassFunction(*(v / sum(t) for v in t[:2]), 1.0 - sum(v / sum(t) for v in t[:2])))


def _close(a, b, tol=1e-9):
    return np.allclose(a.as_tuple(), b.as_tuple(), atol=tol)


class TestDempsterShafer:
    def test_mass_examples(self):
        assert probability_to_mass(0.3, 0.0) == VACUOUS
        assert probability_to_mass(1.0, 1.0).as_tuple() == (1.0, 0.0, 0.0)
        assert np.allclose(probability_to_mass(0.6, 0.9).as_tuple(), (0.54, 0.36, 0.10))

    @pytest.mark.parametrize("p,r", [(1.2, 0.9), (0.5, -0.1)])
    def test_mass_out_of_range(self, p, r):
        with pytest.raises(InvalidArgumentError):
            probability_to_mass(p, r)

    def test_invalid_mass(self):
        with pytest.raises(InvalidArgumentError):
            MassFunction(0.5, 0.6, 0.1)

    def test_hand_computed_pair(self):
        m1, m2 = MassFunction(0.6, 0.3, 0.1), MassFunction(0.7, 0.2, 0.1)
        # K = 0.6*0.2 + 0.3*0.7; life = (0.42 + 0.06 + 0.07) / 0.67
        out = ds_combine([m1, m2])
        assert np.allclose(out.as_tuple(), (0.55 / 0.67, 0.11 / 0.67, 0.01 / 0.67), atol=1e-12)
        assert np.allclose(out.as_tuple(), (0.8209, 0.1642, 0.0149), atol=1e-4)

    def test_total_conflict(self):
        with pytest.raises(ConflictError):
            ds_combine([MassFunction(1, 0, 0), MassFunction(0, 1, 0)])

    def test_needs_two(self):
        with pytest.raises(InvalidArgumentError):
            ds_combine([VACUOUS])

    @given(masses)
    def test_vacuous_identity(self, m):
        assert _close(combine_pair(m, VACUOUS), m) and _close(combine_pair(VACUOUS, m), m)

    @given(masses, masses)
    def test_commutative(self, a, b):
        assert _close(combine_pair(a, b), combine_pair(b, a))

    @given(masses, masses, masses)
    def test_associative(self, a, b, c):
        try:
            left = combine_pair(combine_pair(a, b), c)
            right = combine_pair(a, combine_pair(b, c))
        except ConflictError:
            return
        assert _close(left, right, 1e-8)

    def test_vectorised_matches_pairwise(self, rng):
        probs = rng.random((3, 50))
        life, none = ds_fuse_probabilities(probs, (0.9, 0.8, 0.7))
        for t in range(50):
            m = ds_combine([probability_to_mass(p, r) for p, r in zip(probs[:, t], (0.9, 0.8, 0.7))])
            assert m.life == pytest.approx(life[t], abs=1e-12)
            assert m.none == pytest.approx(none[t], abs=1e-12)
