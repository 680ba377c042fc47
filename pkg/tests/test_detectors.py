"""UWB and acoustic detectors."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lifefuse.detectors import (
    ClassifierConfig,
    SequenceClassifier,
    acoustic_cnn_detect,
    acoustic_correlation_detect,
    acoustic_correlation_probability,
    default_pulse,
    make_uwb_dataset,
    select_range_bin,
    simulate_uwb_scene,
    subbands,
    train_acoustic_detector,
    train_uwb_detector,
    uwb_channels,
    uwb_detect,
    uwb_windows,
)
from lifefuse.detectors.acoustic import make_acoustic_dataset
from lifefuse.dsp import pca_clutter_suppress
from lifefuse.errors import InvalidArgumentError
from lifefuse.simulate import EchoMatrix, generate_pulse, simulate_acoustic


@pytest.fixture(scope="module")
def uwb_model():
    return train_uwb_detector(n_scenes=160, seed=0, validation_scenes=20)


@pytest.fixture(scope="module")
def acoustic_model():
    return train_acoustic_detector(n_steps=600, seed=0)


def _scene(seed, present):
    return simulate_uwb_scene(np.random.default_rng(seed), present, default_pulse())


class TestUwb:
    def test_untrained_outputs_are_probabilities(self, rng):
        model = SequenceClassifier(ClassifierConfig(in_channels=2, length=128))
        p = model.predict(rng.standard_normal((5, 2, 128)) * 10)
        assert np.all((p >= 0) & (p <= 1))

    def test_held_out_accuracy(self, uwb_model):
        X, y = make_uwb_dataset(60, seed=77)
        assert np.mean((uwb_model.predict(X) > 0.5) == y) > 0.9

    def test_validation_curve_recorded(self, uwb_model):
        assert len(uwb_model.val_history) == 12
        assert uwb_model.val_history[-1] < uwb_model.val_history[0]

    def test_motionless_scene_reads_absent(self, uwb_model):
        echo = _scene(5, present=False)
        stream = uwb_detect(echo, default_pulse(), uwb_model)
        assert stream.probs[127:].mean() < 0.5
        assert np.all(stream.probs[:127] == 0.5)

    def test_breathing_scene_reads_present(self, uwb_model):
        stream = uwb_detect(_scene(6, present=True), default_pulse(), uwb_model)
        assert stream.probs[127:].mean() > 0.5
        assert len(stream) == 256

    def test_untrained_model_rejected(self):
        with pytest.raises(InvalidArgumentError):
            uwb_detect(_scene(1, True), default_pulse(), SequenceClassifier())

    def test_window_mismatch(self, uwb_model):
        with pytest.raises(InvalidArgumentError):
            uwb_detect(_scene(1, True), default_pulse(), uwb_model, window=64)

    def test_pulse_sampling_mismatch(self, uwb_model):
        other = generate_pulse("gaussian_monocycle", 1e9, 25e-12, 24)
        with pytest.raises(InvalidArgumentError):
            uwb_detect(_scene(1, True), other, uwb_model)

    @settings(max_examples=10)
    @given(st.floats(1e-3, 1e3))
    def test_range_bin_scale_invariant(self, scale):
        echo = _scene(3, present=True)
        sup = pca_clutter_suppress(echo, 1, 5).data
        assert select_range_bin(sup * scale) == select_range_bin(sup)
        scaled = EchoMatrix(echo.data * scale, echo.slow_interval, echo.fast_interval)
        assert uwb_channels(scaled)[0] == uwb_channels(echo)[0]

    def test_windows_standardised(self):
        w = uwb_windows(_scene(2, True), 64, stride=32)
        assert w.shape == (7, 2, 64)
        assert np.allclose(w.mean(axis=2), 0, atol=1e-9)
        assert np.allclose(w.std(axis=2), 1, atol=1e-6)

    def test_window_longer_than_echo(self):
        with pytest.raises(InvalidArgumentError):
            uwb_windows(_scene(2, True), 300)


class TestAcousticCorrelation:
    def test_identical_segments(self, rng):
        s = rng.standard_normal(256)
        assert acoustic_correlation_detect([s, s, s]) < 0.1

    def test_independent_noise(self):
        rng = np.random.default_rng(0)
        segs = [rng.standard_normal(4096) for _ in range(4)]
        assert acoustic_correlation_detect(segs) > 0.7

    def test_silent_segment(self, rng):
        assert acoustic_correlation_detect([rng.standard_normal(64), np.zeros(64)]) > 0.5

    def test_length_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            acoustic_correlation_detect([np.ones(4), np.ones(5)])

    def test_needs_two(self):
        with pytest.raises(InvalidArgumentError):
            acoustic_correlation_detect([np.ones(4)])

    @settings(max_examples=25)
    @given(st.integers(0, 2**31 - 1), st.permutations(range(4)))
    def test_order_free(self, seed, order):
        rng = np.random.default_rng(seed)
        segs = [rng.standard_normal(32) for _ in range(4)]
        a = acoustic_correlation_detect(segs)
        b = acoustic_correlation_detect([segs[i] for i in order])
        assert a == pytest.approx(b, abs=1e-12) and 0 <= a <= 1

    def test_subbands_sum_to_signal(self, rng):
        x = rng.standard_normal(500)
        bands = subbands(x, 4)
        assert len(bands) == 4 and np.allclose(np.sum(bands, axis=0), x, atol=1e-12)

    def test_probability_of_recording(self):
        sig = simulate_acoustic(np.ones(10, dtype=int), noise_std=0.1, seed=1)
        assert 0 <= acoustic_correlation_probability(sig) <= 1


class TestAcousticCnn:
    def test_untrained_output_range(self, rng):
        model = SequenceClassifier(ClassifierConfig(in_channels=1, length=100, kernel_size=5))
        for _ in range(5):
            assert 0 <= acoustic_cnn_detect(rng.standard_normal(100) * 5, model) <= 1

    def test_held_out_accuracy(self, acoustic_model):
        X, y, _ = make_acoustic_dataset(300, seed=5)
        assert np.mean((acoustic_model.predict(X) > 0.5) == y) > 0.85

    def test_pure_noise_reads_absent(self, acoustic_model):
        _, _, noise_std = make_acoustic_dataset(20, seed=0)
        sig = simulate_acoustic(np.zeros(100, dtype=int), noise_std=noise_std, seed=3)
        probs = [acoustic_cnn_detect(w, acoustic_model) for w in sig.reshape(100, 100)]
        assert np.mean(probs) < 0.5

    def test_length_mismatch(self, acoustic_model):
        with pytest.raises(InvalidArgumentError):
            acoustic_cnn_detect(np.zeros(99), acoustic_model)


class TestClassifier:
    def test_checkpoint_round_trip(self, tmp_path, uwb_model, rng):
        back = SequenceClassifier.load(uwb_model.save(tmp_path / "uwb.ckpt"))
        assert back.trained and back.cfg == uwb_model.cfg
        X = rng.standard_normal((4, 2, 128))
        assert np.allclose(back.predict(X), uwb_model.predict(X), atol=1e-5)

    def test_rejects_wrong_shape(self, rng):
        with pytest.raises(InvalidArgumentError):
            SequenceClassifier().predict(rng.standard_normal((2, 3, 128)))

    def test_conv_stack_too_long(self):
        with pytest.raises(InvalidArgumentError):
            ClassifierConfig(length=4, conv_channels=[2, 2], kernel_size=3)
