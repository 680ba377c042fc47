"""Conv1d -> LSTM -> dense binary sequence classifier shared by the sensor detectors."""

from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import InvalidArgumentError, NumericalFailure
from ..neural.checkpoint import load_into, read_checkpoint, save_checkpoint
from ..neural.layers import LSTM, Conv1d, Dense, Sequential, Sigmoid, Tanh, _Transpose
from ..neural.losses import weighted_bce
from ..neural.optim import Adam


@dataclass
class ClassifierConfig:
    in_channels: int = 2
    length: int = 128
    conv_channels: list = field(default_factory=lambda: [8, 8])
    kernel_size: int = 3
    lstm_hidden: int = 32
    lstm_layers: int = 2
    dense_widths: list = field(default_factory=lambda: [16])
    seed: int = 0

    def __post_init__(self):
        if self.length - len(self.conv_channels) * (self.kernel_size - 1) < 1:
            raise InvalidArgumentError("input length too short for the conv stack")
        if min([self.in_channels, self.lstm_hidden, self.lstm_layers, self.kernel_size,
                *self.conv_channels, *self.dense_widths]) < 1:
            raise InvalidArgumentError("classifier sizes must be >= 1")


class SequenceClassifier:
    """(B, C, L) windows to life probabilities (B,)."""

    def __init__(self, cfg=None, **kwargs):
        self.cfg = cfg or ClassifierConfig(**kwargs)
        c = self.cfg
        rng = np.random.default_rng(np.random.SeedSequence(c.seed).spawn(1)[0])
        self.shuffle_rng = np.random.default_rng(c.seed + 1)
        layers, width = [], c.in_channels
        for ch in c.conv_channels:
            layers += [Conv1d(width, ch, c.kernel_size, rng=rng), Tanh()]
            width = ch
        layers += [_Transpose(), LSTM(width, c.lstm_hidden, c.lstm_layers,
                                      return_sequences=False, rng=rng)]
        width = c.lstm_hidden
        for w in c.dense_widths:
            layers += [Dense(width, w, rng=rng), Tanh()]
            width = w
        layers += [Dense(width, 1, rng=rng), Sigmoid()]
        self.net = Sequential(layers)
        self.trained = False
        self.input_scale = 1.0

    def named_layers(self):
        return [(f"{i}.{layer.kind}", layer) for i, layer in enumerate(self.net.layers)
                if layer.params]

    def named_parameters(self):
        return self.net.named_parameters()

    def zero_grad(self):
        self.net.zero_grad()

    def check_input(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 2:
            X = X[None]
        if X.ndim != 3 or X.shape[1:] != (self.cfg.in_channels, self.cfg.length):
            raise InvalidArgumentError(
                f"classifier expects (batch, {self.cfg.in_channels}, {self.cfg.length}) "
                f"windows, got {X.shape}")
        return X

    def forward(self, X, train=False):
        return self.net.forward(self.check_input(X) * self.input_scale, train=train)[:, 0]

    def backward(self, dprob):
        return self.net.backward(np.asarray(dprob)[:, None]) * self.input_scale

    def predict(self, X, batch=256):
        X = self.check_input(X)
        return np.concatenate([self.forward(X[i : i + batch]) for i in range(0, len(X), batch)])

    def fit(self, X, y, epochs=15, batch=32, learning_rate=3e-3, weights=None, validation=None):
        """Mini-batch Adam on weighted BCE; returns the per-epoch mean training loss.

        With ``validation=(Xv, yv)`` the per-epoch held-out loss lands in
        ``self.val_history``.
        """
        X = self.check_input(X)
        self.val_history = []
        y = np.asarray(y, dtype=np.float64)
        w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=np.float64)
        opt = Adam(learning_rate=learning_rate)
        losses = []
        for epoch in range(epochs):
            order = self.shuffle_rng.permutation(len(y))
            total = 0.0
            for start in range(0, len(y), batch):
                idx = order[start : start + batch]
                self.zero_grad()
                loss, grad = weighted_bce(self.forward(X[idx], train=True), y[idx], w[idx])
                if not np.isfinite(loss):
                    raise NumericalFailure(f"non-finite loss at epoch {epoch + 1}",
                                           where=(epoch + 1, start // batch))
                self.backward(grad)
                opt.step(self.named_parameters())
                total += loss * len(idx)
            losses.append(total / len(y))
            if validation is not None:
                Xv, yv = validation
                self.val_history.append(weighted_bce(self.predict(Xv),
                                                     np.asarray(yv, dtype=np.float64))[0])
        self.trained = True
        return losses

    def save(self, path, kind="sequence_classifier"):
        meta = {"model": kind, "config": asdict(self.cfg), "input_scale": self.input_scale}
        return save_checkpoint(path, self.named_layers(), meta)

    @classmethod
    def load(cls, path):
        header, params = read_checkpoint(path)
        model = cls(ClassifierConfig(**header["meta"]["config"]))
        load_into(model.named_layers(), params)
        model.input_scale = header["meta"].get("input_scale", 1.0)
        model.trained = True
        return model
