"""Seeded synthetic sources: UWB echo matrices, acoustic signals, and
tri-sensor life-probability streams with ground-truth presence labels.

Every generator is a pure function of its arguments and ``seed``.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvalidArgumentError
from .streams import ProbabilityStream, SensorStreams

SENSORS = ("uwb", "infrared", "acoustic")


# ---------------------------------------------------------------------------
# UWB radar
# ---------------------------------------------------------------------------


@dataclass
class PulseWaveform:
    samples: np.ndarray
    sample_interval: float

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size < 2:
            raise InvalidArgumentError("pulse needs at least 2 samples")
        if not np.all(np.isfinite(self.samples)):
            raise InvalidArgumentError("pulse samples must be finite")
        if self.sample_interval <= 0:
            raise InvalidArgumentError("pulse sample_interval must be positive")

    def __len__(self):
        return self.samples.size

    @property
    def duration(self):
        return self.samples.size * self.sample_interval

    def at(self, t):
        """Linearly interpolated pulse value at times ``t`` (zero outside support)."""
        pos = np.asarray(t) / self.sample_interval
        return np.interp(pos, np.arange(self.samples.size), self.samples, left=0.0, right=0.0)


def generate_pulse(kind="gaussian_monocycle", center_freq=1e9, sample_interval=50e-12, length=64):
    """Gaussian or Gaussian-monocycle pulse centred in a ``length``-sample window.

    The Gaussian width is ``1 / (2 pi center_freq)``, which puts the
    monocycle's spectral peak at ``center_freq``. Peak magnitude is 1.
    """
    if center_freq <= 0 or sample_interval <= 0:
        raise InvalidArgumentError("center_freq and sample_interval must be positive")
    if length < 2:
        raise InvalidArgumentError("pulse length must be >= 2")
    sigma = 1.0 / (2.0 * np.pi * center_freq)
    t = (np.arange(length) - (length - 1) / 2.0) * sample_interval
    gauss = np.exp(-0.5 * (t / sigma) ** 2)
    if kind == "gaussian":
        samples = gauss
    elif kind == "gaussian_monocycle":
        samples = -t / sigma * gauss
    else:
        raise InvalidArgumentError(f"unknown pulse kind {kind!r}")
    return PulseWaveform(samples / np.max(np.abs(samples)), sample_interval)


@dataclass
class ClutterPath:
    amplitude: float
    delay: float


def _as_path(p):
    if isinstance(p, ClutterPath):
        return p
    if isinstance(p, dict):
        return ClutterPath(**p)
    return ClutterPath(*p)


@dataclass
class UwbChannelModel:
    """Discrete-path channel: one breathing target plus static clutter.

    The target delay is ``base_delay + motion_amplitude * sin(2 pi breath_freq t)``
    plus an optional heartbeat harmonic (off by default).
    """

    vital_amplitude: float = 1.0
    base_delay: float = 1.0e-9
    motion_amplitude: float = 5e-12
    breath_freq: float = 0.3
    clutter_paths: list = field(default_factory=list)
    noise_std: float = 0.0
    heartbeat_amplitude: float = 0.0
    heartbeat_freq: float = 1.2

    def __post_init__(self):
        self.clutter_paths = [_as_path(p) for p in self.clutter_paths]
        amps = [self.vital_amplitude] + [p.amplitude for p in self.clutter_paths]
        if not np.all(np.isfinite(amps)):
            raise InvalidArgumentError("path amplitudes must be finite")
        if self.base_delay < 0 or any(p.delay < 0 for p in self.clutter_paths):
            raise InvalidArgumentError("path delays must be >= 0")
        if self.breath_freq <= 0:
            raise InvalidArgumentError("breath_freq must be positive")
        if self.motion_amplitude < 0 or self.heartbeat_amplitude < 0:
            raise InvalidArgumentError("motion amplitudes must be >= 0")
        if self.noise_std < 0:
            raise InvalidArgumentError("noise_std must be >= 0")

    def vital_delay(self, t):
        t = np.asarray(t, dtype=np.float64)
        delay = self.base_delay + self.motion_amplitude * np.sin(2 * np.pi * self.breath_freq * t)
        if self.heartbeat_amplitude:
            delay = delay + self.heartbeat_amplitude * np.sin(2 * np.pi * self.heartbeat_freq * t)
        return delay


@dataclass
class EchoMatrix:
    """Rows are slow time (pulses), columns fast time (range bins)."""

    data: np.ndarray
    slow_interval: float
    fast_interval: float

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2 or min(self.data.shape) < 2:
            raise InvalidArgumentError(f"echo matrix must be at least 2x2, got {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise InvalidArgumentError("echo matrix entries must be finite")
        if self.slow_interval <= 0 or self.fast_interval <= 0:
            raise InvalidArgumentError("sampling intervals must be positive")

    @property
    def M(self):
        return self.data.shape[0]

    @property
    def N(self):
        return self.data.shape[1]

    @property
    def prf(self):
        return 1.0 / self.slow_interval

    def with_data(self, data):
        return EchoMatrix(data, self.slow_interval, self.fast_interval)


def simulate_echo_matrix(channel, pulse, M, N, T_s, seed=0):
    """Echo matrix R[m, n] for slow-time index m and fast-time bin n."""
    if M < 2 or N < 2:
        raise InvalidArgumentError("M and N must be >= 2")
    if T_s <= 0:
        raise InvalidArgumentError("slow-time interval must be positive")
    if channel.breath_freq >= 0.5 / T_s:
        raise InvalidArgumentError(
            f"breath_freq {channel.breath_freq} Hz not below PRF/2 = {0.5 / T_s} Hz")
    t_f = pulse.sample_interval
    window = (N - 1) * t_f
    if pulse.duration > N * t_f:
        raise InvalidArgumentError("pulse longer than the fast-time window")
    tail = (len(pulse) - 1) * t_f

    slow_t = np.arange(M) * T_s
    fast_t = np.arange(N) * t_f
    vital = channel.vital_delay(slow_t)
    if vital.max() + tail > window:
        raise InvalidArgumentError("path 0 (vital) delay exceeds the fast-time window")
    for idx, path in enumerate(channel.clutter_paths, start=1):
        if path.delay + tail > window:
            raise InvalidArgumentError(f"path {idx} (clutter) delay exceeds the fast-time window")

    data = channel.vital_amplitude * pulse.at(fast_t[None, :] - vital[:, None])
    if channel.clutter_paths:
        static = sum(p.amplitude * pulse.at(fast_t - p.delay) for p in channel.clutter_paths)
        data = data + static[None, :]
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((M, N))
    if channel.noise_std > 0:
        data = data + channel.noise_std * noise
    return EchoMatrix(data, T_s, t_f)


# ---------------------------------------------------------------------------
# acoustic
# ---------------------------------------------------------------------------


def _tap_kernel(sample_rate, width):
    n = max(3, int(round(width * sample_rate)))
    t = np.arange(n) / sample_rate
    return np.hanning(n + 2)[1:-1] * np.sin(2 * np.pi * (sample_rate / 8.0) * t)


def simulate_acoustic(presence, breath_freq=0.3, tap_rate=2.0, noise_std=0.0, sample_rate=100.0,
                      seed=0, step_duration=1.0, tap_amplitude=1.0, breath_amplitude=0.3,
                      tap_width=0.1, return_clean=False):
    """Periodic knocks plus a respiration tone while ``presence`` is 1, noise throughout.

    Each presence entry covers ``step_duration`` seconds. A knock is emitted
    only when the step it starts in is occupied.
    """
    presence = np.asarray(presence, dtype=np.int64)
    if sample_rate <= 2 * max(breath_freq, tap_rate):
        raise InvalidArgumentError(
            f"sample_rate {sample_rate} Hz must exceed 2*max(breath_freq, tap_rate)")
    if noise_std < 0:
        raise InvalidArgumentError("noise_std must be >= 0")
    if breath_freq <= 0 or tap_rate <= 0 or step_duration <= 0:
        raise InvalidArgumentError("frequencies and step_duration must be positive")
    per_step = int(round(step_duration * sample_rate))
    n = presence.size * per_step
    rng = np.random.default_rng(seed)
    tap_phase = rng.uniform(0.0, 1.0 / tap_rate)
    breath_phase = rng.uniform(0.0, 2 * np.pi)

    t = np.arange(n) / sample_rate
    gate = np.repeat(presence, per_step).astype(np.float64)
    clean = breath_amplitude * np.sin(2 * np.pi * breath_freq * t + breath_phase) * gate
    kernel = tap_amplitude * _tap_kernel(sample_rate, tap_width)
    period = sample_rate / tap_rate
    k = 0
    while True:
        start = int(round((tap_phase * sample_rate) + k * period))
        if start >= n:
            break
        if gate[start]:
            stop = min(n, start + kernel.size)
            clean[start:stop] += kernel[: stop - start]
        k += 1
    signal = clean + noise_std * rng.standard_normal(n)
    return (signal, clean) if return_clean else signal


# ---------------------------------------------------------------------------
# probability streams
# ---------------------------------------------------------------------------


@dataclass
class SensorProfile:
    """Beta-distributed detector output with state-dependent mean.

    ``interference_rate`` is the fraction of time the sensor outputs
    uninformative uniform noise instead.
    """

    mean_prob_present: float = 0.7
    mean_prob_absent: float = 0.3
    concentration: float = 4.0
    interference_rate: float = 0.0

    def validate(self, name):
        for key in ("mean_prob_present", "mean_prob_absent", "interference_rate"):
            if not 0.0 <= getattr(self, key) <= 1.0:
                raise InvalidArgumentError(f"{name}.{key} must lie in [0, 1]")
        if self.concentration <= 0:
            raise InvalidArgumentError(f"{name}.concentration must be positive")


@dataclass
class ScenarioConfig:
    duration: float = 1000.0
    step: float = 1.0
    stay_present: float = 0.97
    stay_absent: float = 0.97
    initial_present: float = 0.5
    sensor_profiles: dict = field(default_factory=lambda: {s: SensorProfile() for s in SENSORS})
    episode_length: int = 20
    disjoint_interference: bool = False
    seed: int = 0

    def __post_init__(self):
        self.sensor_profiles = {
            name: (p if isinstance(p, SensorProfile) else SensorProfile(**p))
            for name, p in self.sensor_profiles.items()
        }
        self.validate()

    @property
    def length(self):
        return int(round(self.duration / self.step))

    def validate(self):
        if self.duration <= 0 or self.step <= 0:
            raise InvalidArgumentError("duration and step must be positive")
        if self.length < 1:
            raise InvalidArgumentError("scenario shorter than one step")
        for key in ("stay_present", "stay_absent", "initial_present"):
            if not 0.0 <= getattr(self, key) <= 1.0:
                raise InvalidArgumentError(f"{key} must lie in [0, 1]")
        if set(self.sensor_profiles) != set(SENSORS):
            raise InvalidArgumentError(f"sensor_profiles must name exactly {SENSORS}")
        for name, profile in self.sensor_profiles.items():
            profile.validate(name)
        if self.episode_length < 1:
            raise InvalidArgumentError("episode_length must be >= 1")
        if self.disjoint_interference:
            total = sum(p.interference_rate for p in self.sensor_profiles.values())
            if total > 1.0 + 1e-12:
                raise InvalidArgumentError("disjoint interference rates must sum to <= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidArgumentError("seed must be an unsigned 64-bit integer")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


def _markov_labels(cfg, rng):
    n = cfg.length
    u = rng.random(n)
    labels = np.empty(n, dtype=np.int64)
    state = int(u[0] < cfg.initial_present)
    labels[0] = state
    for i in range(1, n):
        stay = cfg.stay_present if state else cfg.stay_absent
        if u[i] >= stay:
            state = 1 - state
        labels[i] = state
    return labels


def _interference_masks(cfg, rng):
    n = cfg.length
    n_blocks = -(-n // cfg.episode_length)
    rates = [cfg.sensor_profiles[s].interference_rate for s in SENSORS]
    owner = np.full(n_blocks, -1)
    if cfg.disjoint_interference:
        counts = [int(round(r * n_blocks)) for r in rates]
        slots = np.concatenate([np.full(c, i) for i, c in enumerate(counts)] +
                               [np.full(max(0, n_blocks - sum(counts)), -1)])[:n_blocks]
        owner = rng.permutation(slots)
        blocks = [owner == i for i in range(len(SENSORS))]
    else:
        blocks = [rng.random(n_blocks) < r for r in rates]
    return [np.repeat(b, cfg.episode_length)[:n] for b in blocks]


def _beta_draw(rng, mean, concentration, size):
    if mean <= 0.0 or mean >= 1.0:
        rng.random(size)  # keep the stream position independent of the mean
        return np.full(size, float(mean))
    return rng.beta(mean * concentration, (1.0 - mean) * concentration, size)


def simulate_probability_streams(cfg):
    """Hidden two-state presence chain observed by three noisy detectors."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    labels = _markov_labels(cfg, rng)
    masks = _interference_masks(cfg, rng)
    n = labels.size
    t = np.arange(n) * cfg.step
    streams = {}
    for name, mask in zip(SENSORS, masks):
        prof = cfg.sensor_profiles[name]
        present = _beta_draw(rng, prof.mean_prob_present, prof.concentration, n)
        absent = _beta_draw(rng, prof.mean_prob_absent, prof.concentration, n)
        noise = rng.random(n)
        probs = np.where(mask, noise, np.where(labels == 1, present, absent))
        streams[name] = ProbabilityStream(t, probs, labels)
    return SensorStreams(t, streams["uwb"], streams["infrared"], streams["acoustic"])


# Presets run 3000 steps with a mean dwell of 20 steps so the chronological
# test block holds several presence/absence episodes.
SCENARIOS = {
    "standard": {
        "duration": 3000.0, "stay_present": 0.95, "stay_absent": 0.95,
        "sensor_profiles": {
            "uwb": {"mean_prob_present": 0.68, "mean_prob_absent": 0.32, "concentration": 3.0,
                    "interference_rate": 0.1},
            "infrared": {"mean_prob_present": 0.65, "mean_prob_absent": 0.35,
                         "concentration": 3.0, "interference_rate": 0.1},
            "acoustic": {"mean_prob_present": 0.62, "mean_prob_absent": 0.38,
                         "concentration": 3.0, "interference_rate": 0.1},
        },
    },
    "interference": {
        "duration": 3000.0, "stay_present": 0.95, "stay_absent": 0.95,
        "disjoint_interference": True,
        "sensor_profiles": {
            "uwb": {"mean_prob_present": 0.72, "mean_prob_absent": 0.28, "concentration": 4.0,
                    "interference_rate": 0.2},
            "infrared": {"mean_prob_present": 0.7, "mean_prob_absent": 0.3,
                         "concentration": 4.0, "interference_rate": 0.2},
            "acoustic": {"mean_prob_present": 0.68, "mean_prob_absent": 0.32,
                         "concentration": 4.0, "interference_rate": 0.2},
        },
    },
}


def scenario(name, **overrides):
    """Named :class:`ScenarioConfig` preset (``standard`` or ``interference``)."""
    try:
        values = {k: v for k, v in SCENARIOS[name].items()}
    except KeyError:
        raise InvalidArgumentError(f"unknown scenario {name!r}; expected one of {sorted(SCENARIOS)}")
    values.update(overrides)
    return ScenarioConfig(**values)
