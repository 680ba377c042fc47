"""Two-channel UWB life detector: PCA clutter suppression, range-bin selection,
sliding slow-time windows and a Conv1d+LSTM classifier."""

import numpy as np

from ..dsp import pca_clutter_suppress
from ..errors import InvalidArgumentError
from ..simulate import ClutterPath, UwbChannelModel, generate_pulse, simulate_echo_matrix
from ..streams import ProbabilityStream
from .classifier import ClassifierConfig, SequenceClassifier

DEFAULT_WINDOW = 128
DEFAULT_PRF = 20.0


def select_range_bin(suppressed):
    """Fast-time bin with the largest slow-time variance."""
    return int(np.argmax(np.var(np.asarray(suppressed), axis=0)))


def _zscore(x, axis=-1):
    x = x - x.mean(axis=axis, keepdims=True)
    return x / (x.std(axis=axis, keepdims=True) + 1e-12)


def uwb_channels(echo, drop_leading=1, keep=5):
    """``(bin, raw, suppressed)``: slow-time signals at the selected range bin.

    ``raw`` is the echo before clutter suppression, ``suppressed`` after it.
    """
    keep = min(keep, min(echo.M, echo.N) - drop_leading)
    sup = pca_clutter_suppress(echo, drop_leading, keep).data
    rb = select_range_bin(sup)
    return rb, echo.data[:, rb].copy(), sup[:, rb].copy()


def uwb_windows(echo, window=DEFAULT_WINDOW, stride=1, drop_leading=1, keep=5):
    """(n, 2, window) standardised windows; window j ends at slow-time step j*stride + window-1."""
    if not 2 <= window <= echo.M:
        raise InvalidArgumentError(f"window {window} must lie in [2, M={echo.M}]")
    _, raw, sup = uwb_channels(echo, drop_leading, keep)
    both = np.stack([raw, sup])
    view = np.lib.stride_tricks.sliding_window_view(both, window, axis=1)[:, ::stride]
    return _zscore(np.ascontiguousarray(view.transpose(1, 0, 2)))


def uwb_detect(echo, pulse, model, window=DEFAULT_WINDOW, labels=None):
    """One life probability per slow-time step; the first ``window - 1`` steps read 0.5.

    ``pulse`` must be the waveform the echo was recorded with; it fixes the
    fast-time sampling the model was trained on. ``labels`` (optional) are
    attached to the returned stream, zeros otherwise.
    """
    if not isinstance(model, SequenceClassifier) or not model.trained:
        raise InvalidArgumentError("uwb_detect needs a trained SequenceClassifier")
    if model.cfg.in_channels != 2 or model.cfg.length != window:
        raise InvalidArgumentError(
            f"model expects {model.cfg.in_channels}x{model.cfg.length} windows, not 2x{window}")
    if abs(pulse.sample_interval - echo.fast_interval) > 1e-9 * echo.fast_interval:
        raise InvalidArgumentError("pulse sampling does not match the echo's fast-time interval")
    probs = np.full(echo.M, 0.5)
    probs[window - 1 :] = model.predict(uwb_windows(echo, window))
    t = np.arange(echo.M) * echo.slow_interval
    labels = np.zeros(echo.M, dtype=np.int64) if labels is None else labels
    return ProbabilityStream(t, probs, labels)


def random_channel(rng, present, motion_amplitude=5e-12, n_clutter=(1, 3)):
    return UwbChannelModel(
        vital_amplitude=rng.uniform(0.5, 1.5),
        base_delay=rng.uniform(0.4e-9, 1.6e-9),
        motion_amplitude=motion_amplitude if present else 0.0,
        breath_freq=rng.uniform(0.2, 0.5),
        clutter_paths=[ClutterPath(rng.uniform(0.5, 2.0), rng.uniform(0.0, 1.8e-9))
                       for _ in range(rng.integers(n_clutter[0], n_clutter[1] + 1))],
    )


def noise_for_snr(channel, pulse, M, N, T_s, snr_db, motion_amplitude=5e-12):
    """Noise std giving ``snr_db`` between the breathing modulation and the noise.

    Signal power is the largest slow-time variance over range bins of the
    noiseless echo with the target breathing at ``motion_amplitude``.
    """
    probe = UwbChannelModel(channel.vital_amplitude, channel.base_delay, motion_amplitude,
                            channel.breath_freq, channel.clutter_paths, 0.0)
    clean = simulate_echo_matrix(probe, pulse, M, N, T_s).data
    power = float(np.max(np.var(clean, axis=0)))
    return np.sqrt(power / 10 ** (snr_db / 10.0))


def simulate_uwb_scene(rng, present, pulse, M=256, N=64, prf=DEFAULT_PRF, snr_db=10.0,
                       motion_amplitude=5e-12):
    channel = random_channel(rng, present, motion_amplitude)
    T_s = 1.0 / prf
    channel.noise_std = noise_for_snr(channel, pulse, M, N, T_s, snr_db, motion_amplitude)
    return simulate_echo_matrix(channel, pulse, M, N, T_s, seed=int(rng.integers(2**63)))


def make_uwb_dataset(n_scenes, seed=0, window=DEFAULT_WINDOW, windows_per_scene=4, M=256,
                     snr_db=10.0, motion_amplitude=5e-12, pulse=None):
    """Labelled two-channel windows from alternating presence/absence scenes."""
    pulse = pulse or default_pulse()
    rng = np.random.default_rng(seed)
    X, y = [], []
    for i in range(n_scenes):
        present = i % 2 == 0
        echo = simulate_uwb_scene(rng, present, pulse, M=M, snr_db=snr_db,
                                  motion_amplitude=motion_amplitude)
        wins = uwb_windows(echo, window)
        pick = rng.choice(len(wins), size=min(windows_per_scene, len(wins)), replace=False)
        X.append(wins[np.sort(pick)])
        y += [int(present)] * len(pick)
    return np.concatenate(X), np.asarray(y)


def default_pulse():
    return generate_pulse("gaussian_monocycle", 1e9, 50e-12, 24)


def train_uwb_detector(n_scenes=200, seed=0, window=DEFAULT_WINDOW, epochs=12,
                       validation_scenes=0, **kwargs):
    """Fit the default UWB detector stack: conv(2->8) -> conv(8->8) -> LSTM x2 (32) -> 16 -> 1.

    ``validation_scenes`` > 0 adds a held-out set (drawn from ``seed + 1``)
    whose per-epoch loss is kept in ``model.val_history``.
    """
    X, y = make_uwb_dataset(n_scenes, seed=seed, window=window, **kwargs)
    val = None
    if validation_scenes:
        val = make_uwb_dataset(validation_scenes, seed=seed + 1, window=window, **kwargs)
    model = SequenceClassifier(ClassifierConfig(in_channels=2, length=window, seed=seed))
    model.history = model.fit(X, y, epochs=epochs, validation=val)
    return model
