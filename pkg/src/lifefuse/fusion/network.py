"""Three-branch Conv1d -> LSTM decision-level fusion network.

Input batches are (B, 3, 2, G): sensor branch, {raw, smoothed} channel, time.
Each branch runs conv1d(2 -> C, K) then a stacked LSTM; branch feature maps are
scaled by the per-sensor reliability weights and concatenated, passed through
two fusion LSTMs (the second keeps only its last state) and a dense head
ending in a sigmoid.
"""

import numpy as np

from ..errors import InvalidArgumentError
from ..neural.checkpoint import load_into, read_checkpoint, save_checkpoint
from ..neural.layers import (
    LSTM,
    Conv1d,
    Dense,
    Dropout,
    Sequential,
    Sigmoid,
    Tanh,
    _Transpose,
)
from .config import FusionConfig


def rng_streams(seed):
    """Independent generators for (init, shuffle, dropout) from one master seed."""
    init, shuffle, drop = np.random.SeedSequence(seed).spawn(3)
    return (np.random.default_rng(init), np.random.default_rng(shuffle),
            np.random.default_rng(drop))


class FusionNetwork:
    def __init__(self, cfg):
        if not isinstance(cfg, FusionConfig):
            raise InvalidArgumentError("FusionNetwork needs a FusionConfig")
        cfg.validate()
        self.cfg = cfg
        init_rng, self.shuffle_rng, drop_rng = rng_streams(cfg.seed)
        self.branches = []
        for _ in range(3):
            self.branches.append(Sequential([
                Conv1d(2, cfg.conv_channels, cfg.conv_kernel, rng=init_rng),
                _Transpose(),
                LSTM(cfg.conv_channels, cfg.branch_hidden, cfg.branch_lstm_layers, rng=init_rng),
            ]))
        self.drop_concat = Dropout(cfg.keep_prob, rng=drop_rng)
        self.fuse1 = LSTM(3 * cfg.branch_hidden, cfg.fusion_hidden_1, 1, rng=init_rng)
        self.fuse2 = LSTM(cfg.fusion_hidden_1, cfg.fusion_hidden_2, 1, return_sequences=False,
                          rng=init_rng)
        self.drop_head = Dropout(cfg.keep_prob, rng=drop_rng)
        head = []
        width = cfg.fusion_hidden_2
        for w in cfg.dense_widths:
            head += [Dense(width, w, rng=init_rng), Tanh()]
            width = w
        head += [Dense(width, 1, rng=init_rng), Sigmoid()]
        self.head = Sequential(head)
        self.weights = np.asarray(cfg.sensor_weights, dtype=np.float64)

    @property
    def time_steps(self):
        return self.cfg.G - self.cfg.conv_kernel + 1

    def named_layers(self):
        """Parametric layers in a fixed order (used by checkpoints)."""
        out = []
        for i, branch in enumerate(self.branches):
            out += [(f"branch{i}.conv", branch.layers[0]), (f"branch{i}.lstm", branch.layers[2])]
        out += [("fuse1", self.fuse1), ("fuse2", self.fuse2)]
        dense = [layer for layer in self.head.layers if isinstance(layer, Dense)]
        out += [(f"head.dense{j}", layer) for j, layer in enumerate(dense)]
        return out

    def named_parameters(self, prefix=""):
        for name, layer in self.named_layers():
            yield from layer.named_parameters(f"{prefix}{name}.")

    def parameter_count(self):
        return int(sum(p.size for _, p, _ in self.named_parameters()))

    def zero_grad(self):
        for _, layer in self.named_layers():
            layer.zero_grad()

    def _check_input(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 3:
            x = x[None]
        if x.ndim != 4 or x.shape[1:] != (3, 2, self.cfg.G):
            raise InvalidArgumentError(
                f"fusion input must be (batch, 3, 2, {self.cfg.G}), got {x.shape}")
        return x

    def forward(self, x, train=False):
        """Probabilities of shape (B,) for a (B, 3, 2, G) batch."""
        x = (self._check_input(x) - 0.5) * 2.0  # probabilities mapped to [-1, 1]
        feats = [w * branch.forward(x[:, i], train=train)
                 for i, (w, branch) in enumerate(zip(self.weights, self.branches))]
        z = np.concatenate(feats, axis=2)
        z = self.drop_concat.forward(z, train=train)
        z = self.fuse1.forward(z, train=train)
        z = self.fuse2.forward(z, train=train)
        z = self.drop_head.forward(z, train=train)
        return self.head.forward(z, train=train)[:, 0]

    def backward(self, dprob):
        """Backpropagate dloss/dprob (B,); returns the input gradient."""
        dz = self.head.backward(np.asarray(dprob)[:, None])
        dz = self.drop_head.backward(dz)
        dz = self.fuse2.backward(dz)
        dz = self.fuse1.backward(dz)
        dz = self.drop_concat.backward(dz)
        hid = self.cfg.branch_hidden
        dx = []
        for i, (w, branch) in enumerate(zip(self.weights, self.branches)):
            dx.append(branch.backward(w * dz[:, :, i * hid : (i + 1) * hid]))
        return 2.0 * np.stack(dx, axis=1)

    def predict(self, x, batch=256):
        x = self._check_input(x)
        return np.concatenate([self.forward(x[i : i + batch]) for i in range(0, len(x), batch)])

    def __repr__(self):
        c = self.cfg
        return (f"FusionNetwork(G={c.G}, branches=3x[conv1d(2->{c.conv_channels}, "
                f"K={c.conv_kernel}), lstm x{c.branch_lstm_layers}(H={c.branch_hidden})], "
                f"fusion=lstm({c.fusion_hidden_1})->lstm({c.fusion_hidden_2}), "
                f"dense={c.dense_widths}->1, params={self.parameter_count()})")


def build_fusion_network(cfg):
    return FusionNetwork(cfg)


def fusion_forward(net, sample, mode="eval"):
    """Probability for a single :class:`~lifefuse.dsp.FusionSample`."""
    branches = getattr(sample, "branches", sample)
    return float(net.forward(np.asarray(branches)[None], train=(mode == "train"))[0])


def save_fusion_checkpoint(net, path):
    return save_checkpoint(path, net.named_layers(), {"model": "fusion", "config": net.cfg.to_dict()})


def load_fusion_checkpoint(path):
    header, params = read_checkpoint(path)
    meta = header.get("meta") or {}
    if meta.get("model") != "fusion":
        raise InvalidArgumentError(f"{path} is not a fusion checkpoint")
    net = FusionNetwork(FusionConfig.from_dict(meta["config"]))
    load_into(net.named_layers(), params)
    return net
