"""Acoustic life detectors.

The correlation detector compares sub-band components of a recording: if
all components look alike the recording is taken as lifeless. The CNN
detector classifies raw windows directly.
"""

from itertools import combinations

import numpy as np

from ..dsp import cross_correlate, moving_average
from ..errors import InvalidArgumentError
from ..simulate import _markov_labels, ScenarioConfig, simulate_acoustic
from .classifier import ClassifierConfig, SequenceClassifier


def peak_similarity(x, y):
    """Largest |normalised cross-correlation| over all lags; 0 if either is silent."""
    ex, ey = float(np.dot(x, x)), float(np.dot(y, y))
    if ex == 0.0 or ey == 0.0:
        return 0.0
    return float(np.max(np.abs(cross_correlate(x, y).values)) / np.sqrt(ex * ey))


def acoustic_correlation_detect(segments, threshold=0.5, steepness=10.0):
    """Life probability from the mean pairwise peak similarity ``s`` of ``segments``.

    ``1 - s`` (clamped to [0, 1]) goes through a logistic centred at ``threshold``.
    """
    segs = [np.asarray(s, dtype=np.float64) for s in segments]
    if len(segs) < 2:
        raise InvalidArgumentError("need at least two segments")
    if len({s.size for s in segs}) != 1:
        raise InvalidArgumentError("segments must share one length")
    sim = float(np.mean([peak_similarity(a, b) for a, b in combinations(segs, 2)]))
    q = min(1.0, max(0.0, 1.0 - sim))
    return float(1.0 / (1.0 + np.exp(-steepness * (q - threshold))))


def subbands(signal, n_bands=4, base_width=3):
    """Split ``signal`` into ``n_bands`` components by differencing a cascade of
    centred moving averages (widths 3, 9, 27, ...); the components sum to the input."""
    x = np.asarray(signal, dtype=np.float64)
    if n_bands < 2:
        raise InvalidArgumentError("n_bands must be >= 2")
    bands, current = [], x
    for k in range(1, n_bands):
        low = moving_average(current, base_width**k)
        bands.append(current - low)
        current = low
    bands.append(current)
    return bands


def acoustic_correlation_probability(signal, n_bands=4, threshold=0.5):
    return acoustic_correlation_detect(subbands(signal, n_bands), threshold)


def acoustic_cnn_detect(window, model):
    """Life probability for one raw acoustic window."""
    x = np.asarray(window, dtype=np.float64)
    if x.ndim != 1 or x.size != model.cfg.length:
        raise InvalidArgumentError(
            f"window length {x.size} does not match the model input width {model.cfg.length}")
    return float(model.predict(x[None, None])[0])


def make_acoustic_dataset(n_steps, seed=0, snr_db=0.0, sample_rate=100.0, breath_freq=0.3,
                          tap_rate=2.0, stay=0.8, steps_per_recording=20):
    """One-second windows ``(n, 1, sample_rate)`` with presence labels.

    Windows come from independent recordings of ``steps_per_recording`` steps
    (each with its own knock and breathing phase). Noise is set so the
    occupied portions sit at ``snr_db``.
    """
    rng = np.random.default_rng(seed)
    per = int(round(sample_rate))
    _, ref = simulate_acoustic(np.ones(steps_per_recording, dtype=np.int64), breath_freq,
                               tap_rate, 0.0, sample_rate, seed, return_clean=True)
    noise_std = float(np.sqrt(np.mean(ref**2) / 10 ** (snr_db / 10.0)))
    X, y = [], []
    done = 0
    while done < n_steps:
        steps = min(steps_per_recording, n_steps - done)
        cfg = ScenarioConfig(duration=float(steps), stay_present=stay, stay_absent=stay)
        labels = _markov_labels(cfg, rng)
        sig = simulate_acoustic(labels, breath_freq, tap_rate, noise_std, sample_rate,
                                int(rng.integers(2**63)))
        X.append(sig.reshape(steps, 1, per))
        y.append(labels)
        done += steps
    return np.concatenate(X), np.concatenate(y), noise_std


def train_acoustic_detector(n_steps=600, seed=0, snr_db=0.0, epochs=15, sample_rate=100.0):
    """Fit conv(1->8, K=5) -> conv(8->8, K=5) -> LSTM (16) -> 8 -> 1 on simulated windows."""
    X, y, noise_std = make_acoustic_dataset(n_steps, seed, snr_db, sample_rate)
    model = SequenceClassifier(ClassifierConfig(
        in_channels=1, length=X.shape[2], conv_channels=[8, 8], kernel_size=5, lstm_hidden=16,
        lstm_layers=1, dense_widths=[8], seed=seed))
    model.input_scale = 1.0 / float(np.std(X))
    model.history = model.fit(X, y, epochs=epochs)
    return model
