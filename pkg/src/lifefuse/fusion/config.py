"""Fusion network / training configuration and named presets."""

from dataclasses import asdict, dataclass, field, fields, replace

from ..errors import InvalidArgumentError


@dataclass
class FusionConfig:
    """Sizes default to the G-relative widths: branch LSTM G, fusion LSTMs 3G and 2G,
    dense head [2G, G, G/2]. ``None`` means "derive from G"."""

    G: int = 64
    H: int = 5
    conv_kernel: int = 3
    conv_channels: int = 16
    branch_lstm_layers: int = 3
    branch_hidden: int = None
    fusion_hidden_1: int = None
    fusion_hidden_2: int = None
    dense_widths: list = None
    keep_prob: float = 0.8
    loss: str = "weighted_bce"
    epochs: int = 20
    batch: int = 16
    learning_rate: float = 1e-3
    sensor_weights: list = field(default_factory=lambda: [1.0, 1.0, 1.0])
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        g = self.G
        if self.branch_hidden is None:
            self.branch_hidden = g
        if self.fusion_hidden_1 is None:
            self.fusion_hidden_1 = 3 * g
        if self.fusion_hidden_2 is None:
            self.fusion_hidden_2 = 2 * g
        if self.dense_widths is None:
            self.dense_widths = [2 * g, g, max(1, g // 2)]
        self.dense_widths = [int(w) for w in self.dense_widths]
        self.sensor_weights = [float(w) for w in self.sensor_weights]
        self.validate()

    def validate(self):
        def bad(stage, msg):
            raise InvalidArgumentError(f"FusionConfig.{stage}: {msg}")

        if not 8 <= self.G <= 1024:
            bad("G", f"must lie in [8, 1024], got {self.G}")
        if self.H < 1 or self.H % 2 == 0:
            bad("H", f"smoothing width must be a positive odd count, got {self.H}")
        if self.conv_kernel < 1 or self.conv_kernel % 2 == 0:
            bad("conv_kernel", f"must be odd, got {self.conv_kernel}")
        if self.conv_kernel > self.G:
            bad("conv_kernel", f"kernel {self.conv_kernel} longer than window G={self.G}")
        for name in ("conv_channels", "branch_lstm_layers", "branch_hidden", "fusion_hidden_1",
                     "fusion_hidden_2", "epochs", "batch"):
            if getattr(self, name) < 1:
                bad(name, f"must be >= 1, got {getattr(self, name)}")
        widths = self.dense_widths
        if not widths or any(w < 1 for w in widths):
            bad("dense_widths", f"widths must be >= 1, got {widths}")
        if any(b >= a for a, b in zip(widths, widths[1:])):
            bad("dense_widths", f"widths must be strictly decreasing, got {widths}")
        if not 0.0 < self.keep_prob <= 1.0:
            bad("keep_prob", f"must lie in (0, 1], got {self.keep_prob}")
        if self.loss not in ("weighted_bce", "bce", "mse"):
            bad("loss", f"unknown loss {self.loss!r}")
        if len(self.sensor_weights) != 3 or any(not 0.0 <= w <= 1.0 for w in self.sensor_weights):
            bad("sensor_weights", f"need three values in [0, 1], got {self.sensor_weights}")
        if not 0.0 < self.train_fraction < 1.0:
            bad("train_fraction", f"must lie in (0, 1), got {self.train_fraction}")
        if self.learning_rate <= 0:
            bad("learning_rate", "must be positive")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidArgumentError(f"unknown FusionConfig keys: {sorted(unknown)}")
        return cls(**data)

    def derive(self, **changes):
        """Copy with changes; G-relative sizes are re-derived unless given."""
        base = self.to_dict()
        if "G" in changes:
            for key in ("branch_hidden", "fusion_hidden_1", "fusion_hidden_2", "dense_widths"):
                base[key] = None
        base.update(changes)
        return FusionConfig(**base)


PRESETS = {
    # layer sizes from the G-relative description of the architecture
    "default": {},
    # the parameter-comparison setup: dense64_32_16 head, MSE loss
    "paper-exp": {"G": 64, "fusion_hidden_2": 64, "dense_widths": [64, 32, 16], "loss": "mse"},
    # reduced widths used for multi-seed experiments on one CPU core
    "compact": {"G": 32, "conv_channels": 8, "branch_hidden": 16, "fusion_hidden_1": 32,
                "fusion_hidden_2": 24, "dense_widths": [16, 8]},
}


def preset(name, **overrides):
    try:
        values = dict(PRESETS[name])
    except KeyError:
        raise InvalidArgumentError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}")
    values.update(overrides)
    return FusionConfig(**values)


__all__ = ["FusionConfig", "PRESETS", "preset", "replace"]
