"""Hand-differentiated layers: conv1d, stacked LSTM, dense, dropout, activations.

Every layer works on a leading batch axis and follows the same protocol::

    y = layer.forward(x, train=True)
    dx = layer.backward(dy)       # accumulates into layer.grads

Sequence tensors are laid out as (batch, time, features); conv1d tensors as
(batch, channels, length).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from ..errors import InvalidArgumentError

__all__ = [
    "LayerSpec",
    "Layer",
    "Conv1d",
    "LSTM",
    "Dense",
    "Dropout",
    "Sigmoid",
    "Tanh",
    "ReLU",
    "Sequential",
    "build_layer",
    "conv1d",
    "conv1d_backward",
    "lstm_cell",
    "lstm_cell_backward",
    "lstm_sequence",
    "dropout",
]


@dataclass
class LayerSpec:
    """Kind plus kind-specific sizes, e.g. ``LayerSpec("lstm", {"input_size": 2, ...})``."""

    kind: str
    params: dict = field(default_factory=dict)

    _REQUIRED = {
        "conv1d": ("in_channels", "out_channels", "kernel_size"),
        "lstm": ("input_size", "hidden_size", "num_layers"),
        "dense": ("in_width", "out_width"),
        "dropout": ("keep_prob",),
        "sigmoid": (),
        "tanh": (),
        "relu": (),
    }

    def __post_init__(self):
        if self.kind not in self._REQUIRED:
            raise InvalidArgumentError(f"unknown layer kind {self.kind!r}")
        for key in self._REQUIRED[self.kind]:
            if key not in self.params:
                raise InvalidArgumentError(f"{self.kind} layer needs {key!r}")
        for key, value in self.params.items():
            if key == "keep_prob":
                if not 0.0 < value <= 1.0:
                    raise InvalidArgumentError(f"keep_prob must be in (0, 1], got {value}")
            elif isinstance(value, (int, np.integer)) and not isinstance(value, bool) and value < 1:
                raise InvalidArgumentError(f"{self.kind}.{key} must be >= 1, got {value}")


# ---------------------------------------------------------------------------
# functional kernels
# ---------------------------------------------------------------------------


def conv1d(x, kernels, bias):
    """Valid-mode 1-D cross-correlation (no kernel flip).

    ``x`` is (C_in, L) or (B, C_in, L); ``kernels`` is (C_out, C_in, K).
    """
    x = np.asarray(x)
    squeeze = x.ndim == 2
    if squeeze:
        x = x[None]
    c_out, c_in, k = kernels.shape
    if x.shape[1] != c_in:
        raise InvalidArgumentError(f"conv1d expects {c_in} input channels, got {x.shape[1]}")
    length = x.shape[2]
    if length < k:
        raise InvalidArgumentError(f"conv1d input length {length} shorter than kernel {k}")
    n_out = length - k + 1
    out = np.matmul(kernels[:, :, 0], x[:, :, 0:n_out])
    for j in range(1, k):
        out += np.matmul(kernels[:, :, j], x[:, :, j : j + n_out])
    out += bias[:, None]
    return out[0] if squeeze else out


def conv1d_backward(dout, x, kernels):
    """Gradients (dx, dkernels, dbias) of :func:`conv1d`."""
    squeeze = x.ndim == 2
    if squeeze:
        x, dout = x[None], dout[None]
    k = kernels.shape[2]
    n_out = dout.shape[2]
    dx = np.zeros_like(x)
    dk = np.empty_like(kernels)
    for j in range(k):
        xs = x[:, :, j : j + n_out]
        dk[:, :, j] = np.einsum("bol,bcl->oc", dout, xs)
        dx[:, :, j : j + n_out] += np.matmul(kernels[:, :, j].T, dout)
    db = dout.sum(axis=(0, 2))
    return (dx[0] if squeeze else dx), dk, db


def _gates(z, hidden):
    a = np.empty_like(z)
    a[:, : 2 * hidden] = expit(z[:, : 2 * hidden])
    a[:, 2 * hidden : 3 * hidden] = np.tanh(z[:, 2 * hidden : 3 * hidden])
    a[:, 3 * hidden :] = expit(z[:, 3 * hidden :])
    return a


def lstm_cell(x_t, h_prev, c_prev, weights, return_cache=False):
    """One LSTM step with gate order (input, forget, candidate, output).

    ``weights`` maps ``W_x`` (D, 4H), ``W_h`` (H, 4H) and ``b`` (4H,).
    Inputs may be unbatched vectors or (B, ·) matrices.
    """
    w_x, w_h, b = weights["W_x"], weights["W_h"], weights["b"]
    x_t, h_prev, c_prev = np.atleast_2d(x_t), np.atleast_2d(h_prev), np.atleast_2d(c_prev)
    hidden = w_h.shape[0]
    if w_x.shape[1] != 4 * hidden or w_h.shape[1] != 4 * hidden or b.shape != (4 * hidden,):
        raise InvalidArgumentError("LSTM weights must be (D,4H), (H,4H), (4H,)")
    if x_t.shape[1] != w_x.shape[0]:
        raise InvalidArgumentError(f"LSTM input width {x_t.shape[1]} != {w_x.shape[0]}")
    if h_prev.shape[1] != hidden or c_prev.shape[1] != hidden:
        raise InvalidArgumentError(f"LSTM state width must be {hidden}")
    a = _gates(x_t @ w_x + h_prev @ w_h + b, hidden)
    i, f, g, o = (a[:, s * hidden : (s + 1) * hidden] for s in range(4))
    c_t = f * c_prev + i * g
    tc = np.tanh(c_t)
    h_t = o * tc
    if return_cache:
        return h_t, c_t, (x_t, h_prev, c_prev, a, tc, weights)
    return h_t, c_t


def _gate_grad(dh, dc, a, tc, c_prev, hidden):
    """Pre-activation gradient dz for one step, plus dc_prev."""
    i, f, g, o = (a[:, s * hidden : (s + 1) * hidden] for s in range(4))
    dct = dc + dh * o * (1.0 - tc * tc)
    dz = np.empty_like(a)
    dz[:, :hidden] = dct * g * i * (1.0 - i)
    dz[:, hidden : 2 * hidden] = dct * c_prev * f * (1.0 - f)
    dz[:, 2 * hidden : 3 * hidden] = dct * i * (1.0 - g * g)
    dz[:, 3 * hidden :] = dh * tc * o * (1.0 - o)
    return dz, dct * f


def lstm_cell_backward(dh_t, dc_t, cache):
    """Backward of :func:`lstm_cell`; returns dx, dh_prev, dc_prev, grads."""
    x_t, h_prev, c_prev, a, tc, weights = cache
    hidden = h_prev.shape[1]
    dz, dc_prev = _gate_grad(np.atleast_2d(dh_t), np.atleast_2d(dc_t), a, tc, c_prev, hidden)
    grads = {"W_x": x_t.T @ dz, "W_h": h_prev.T @ dz, "b": dz.sum(axis=0)}
    return dz @ weights["W_x"].T, dz @ weights["W_h"].T, dc_prev, grads


def dropout(x, keep_prob, mode="train", seed=0):
    """Inverted dropout; ``mode="eval"`` is the identity."""
    if not 0.0 < keep_prob <= 1.0:
        raise InvalidArgumentError(f"keep_prob must be in (0, 1], got {keep_prob}")
    if mode == "eval" or keep_prob == 1.0:
        return np.array(x, copy=True)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    mask = rng.random(np.shape(x)) < keep_prob
    return np.where(mask, np.asarray(x) / keep_prob, 0.0)


# ---------------------------------------------------------------------------
# layers
# ---------------------------------------------------------------------------


class Layer:
    kind = "layer"

    def __init__(self):
        self.params = {}
        self.grads = {}

    def forward(self, x, train=False):
        raise NotImplementedError

    def backward(self, dy):
        raise NotImplementedError

    def zero_grad(self):
        for name, p in self.params.items():
            self.grads[name] = np.zeros_like(p)

    def named_parameters(self, prefix=""):
        for name, p in self.params.items():
            yield prefix + name, p, self.grads[name]

    @property
    def spec(self):
        raise NotImplementedError

    def __repr__(self):
        args = ", ".join(f"{k}={v}" for k, v in self.spec.params.items())
        return f"{type(self).__name__}({args})"


def _uniform(rng, bound, shape, dtype):
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


class Conv1d(Layer):
    kind = "conv1d"

    def __init__(self, in_channels, out_channels, kernel_size, rng=None, dtype=np.float64):
        super().__init__()
        rng = rng if rng is not None else np.random.default_rng(0)
        bound = 1.0 / np.sqrt(in_channels * kernel_size)
        self.params["W"] = _uniform(rng, bound, (out_channels, in_channels, kernel_size), dtype)
        self.params["b"] = _uniform(rng, bound, (out_channels,), dtype)
        self.zero_grad()
        self._x = None

    @property
    def spec(self):
        c_out, c_in, k = self.params["W"].shape
        return LayerSpec("conv1d", {"in_channels": c_in, "out_channels": c_out, "kernel_size": k})

    def forward(self, x, train=False):
        self._x = x
        return conv1d(x, self.params["W"], self.params["b"])

    def backward(self, dy):
        dx, dw, db = conv1d_backward(dy, self._x, self.params["W"])
        self.grads["W"] += dw
        self.grads["b"] += db
        return dx


class LSTM(Layer):
    """Stacked LSTM over (B, T, D) inputs with zero initial state.

    With ``return_sequences=False`` only the top layer's last hidden state
    (B, H) is returned.
    """

    kind = "lstm"

    def __init__(self, input_size, hidden_size, num_layers=1, return_sequences=True,
                 forget_bias=1.0, rng=None, dtype=np.float64):
        super().__init__()
        rng = rng if rng is not None else np.random.default_rng(0)
        self.hidden_size = hidden_size
        self.num_layers = num_layers
        self.return_sequences = return_sequences
        bound = 1.0 / np.sqrt(hidden_size)
        width = input_size
        for layer in range(num_layers):
            self.params[f"W_x{layer}"] = _uniform(rng, bound, (width, 4 * hidden_size), dtype)
            self.params[f"W_h{layer}"] = _uniform(rng, bound, (hidden_size, 4 * hidden_size), dtype)
            b = _uniform(rng, bound, (4 * hidden_size,), dtype)
            b[hidden_size : 2 * hidden_size] = forget_bias
            self.params[f"b{layer}"] = b
            width = hidden_size
        self.zero_grad()
        self._caches = []

    @property
    def spec(self):
        return LayerSpec("lstm", {
            "input_size": self.params["W_x0"].shape[0],
            "hidden_size": self.hidden_size,
            "num_layers": self.num_layers,
        })

    def layer_weights(self, layer):
        return {"W_x": self.params[f"W_x{layer}"], "W_h": self.params[f"W_h{layer}"],
                "b": self.params[f"b{layer}"]}

    def forward(self, x, train=False):
        if x.ndim != 3:
            raise InvalidArgumentError(f"LSTM expects (batch, time, features), got shape {x.shape}")
        if x.shape[2] != self.params["W_x0"].shape[0]:
            raise InvalidArgumentError(
                f"LSTM input width {x.shape[2]} != {self.params['W_x0'].shape[0]}")
        n_batch, n_steps, _ = x.shape
        hid = self.hidden_size
        self._caches = []
        seq = x
        for layer in range(self.num_layers):
            w_h = self.params[f"W_h{layer}"]
            xw = seq @ self.params[f"W_x{layer}"] + self.params[f"b{layer}"]
            acts = np.empty_like(xw)
            cells = np.empty((n_batch, n_steps, hid), dtype=xw.dtype)
            hs = np.empty_like(cells)
            h = np.zeros((n_batch, hid), dtype=xw.dtype)
            c = np.zeros_like(h)
            for t in range(n_steps):
                a = _gates(xw[:, t] + h @ w_h, hid)
                c = a[:, hid : 2 * hid] * c + a[:, :hid] * a[:, 2 * hid : 3 * hid]
                h = a[:, 3 * hid :] * np.tanh(c)
                acts[:, t] = a
                cells[:, t] = c
                hs[:, t] = h
            self._caches.append((seq, acts, cells, hs))
            seq = hs
        return seq if self.return_sequences else seq[:, -1]

    def backward(self, dy):
        seq_top = self._caches[-1][3]
        if self.return_sequences:
            dhs = dy
        else:
            dhs = np.zeros_like(seq_top)
            dhs[:, -1] = dy
        hid = self.hidden_size
        for layer in reversed(range(self.num_layers)):
            x, acts, cells, hs = self._caches[layer]
            w_x, w_h = self.params[f"W_x{layer}"], self.params[f"W_h{layer}"]
            n_batch, n_steps, _ = hs.shape
            dz_all = np.empty_like(acts)
            dh_next = np.zeros((n_batch, hid), dtype=hs.dtype)
            dc_next = np.zeros_like(dh_next)
            tanh_c = np.tanh(cells)
            zeros = np.zeros_like(dh_next)
            for t in reversed(range(n_steps)):
                c_prev = cells[:, t - 1] if t > 0 else zeros
                dz, dc_next = _gate_grad(dhs[:, t] + dh_next, dc_next, acts[:, t],
                                         tanh_c[:, t], c_prev, hid)
                dz_all[:, t] = dz
                dh_next = dz @ w_h.T
            flat_dz = dz_all.reshape(-1, 4 * hid)
            h_prev = np.concatenate([np.zeros_like(hs[:, :1]), hs[:, :-1]], axis=1)
            self.grads[f"W_h{layer}"] += h_prev.reshape(-1, hid).T @ flat_dz
            self.grads[f"W_x{layer}"] += x.reshape(-1, x.shape[2]).T @ flat_dz
            self.grads[f"b{layer}"] += flat_dz.sum(axis=0)
            dhs = dz_all @ w_x.T
        return dhs


def lstm_sequence(inputs, layer, return_last=False):
    """Run a stacked :class:`LSTM` over an unbatched (T, D) sequence."""
    inputs = np.asarray(inputs)
    if inputs.ndim != 2 or inputs.shape[0] < 1:
        raise InvalidArgumentError("lstm_sequence expects a (T, D) array with T >= 1")
    keep = layer.return_sequences
    layer.return_sequences = True
    try:
        out = layer.forward(inputs[None])[0]
    finally:
        layer.return_sequences = keep
    return out[-1] if return_last else out


class Dense(Layer):
    kind = "dense"

    def __init__(self, in_width, out_width, rng=None, dtype=np.float64):
        super().__init__()
        rng = rng if rng is not None else np.random.default_rng(0)
        bound = 1.0 / np.sqrt(in_width)
        self.params["W"] = _uniform(rng, bound, (in_width, out_width), dtype)
        self.params["b"] = _uniform(rng, bound, (out_width,), dtype)
        self.zero_grad()
        self._x = None

    @property
    def spec(self):
        w = self.params["W"]
        return LayerSpec("dense", {"in_width": w.shape[0], "out_width": w.shape[1]})

    def forward(self, x, train=False):
        if x.shape[-1] != self.params["W"].shape[0]:
            raise InvalidArgumentError(
                f"dense expects width {self.params['W'].shape[0]}, got {x.shape[-1]}")
        self._x = x
        return x @ self.params["W"] + self.params["b"]

    def backward(self, dy):
        x = self._x.reshape(-1, self._x.shape[-1])
        d = dy.reshape(-1, dy.shape[-1])
        self.grads["W"] += x.T @ d
        self.grads["b"] += d.sum(axis=0)
        return dy @ self.params["W"].T


class Dropout(Layer):
    kind = "dropout"

    def __init__(self, keep_prob, rng=None):
        super().__init__()
        if not 0.0 < keep_prob <= 1.0:
            raise InvalidArgumentError(f"keep_prob must be in (0, 1], got {keep_prob}")
        self.keep_prob = keep_prob
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self._scale = None

    @property
    def spec(self):
        return LayerSpec("dropout", {"keep_prob": self.keep_prob})

    def forward(self, x, train=False):
        if not train or self.keep_prob == 1.0:
            self._scale = None
            return x
        self._scale = (self.rng.random(x.shape) < self.keep_prob) / self.keep_prob
        return x * self._scale

    def backward(self, dy):
        return dy if self._scale is None else dy * self._scale


class Sigmoid(Layer):
    kind = "sigmoid"

    @property
    def spec(self):
        return LayerSpec("sigmoid")

    def forward(self, x, train=False):
        self._y = expit(x)
        return self._y

    def backward(self, dy):
        return dy * self._y * (1.0 - self._y)


class Tanh(Layer):
    kind = "tanh"

    @property
    def spec(self):
        return LayerSpec("tanh")

    def forward(self, x, train=False):
        self._y = np.tanh(x)
        return self._y

    def backward(self, dy):
        return dy * (1.0 - self._y * self._y)


class ReLU(Layer):
    kind = "relu"

    @property
    def spec(self):
        return LayerSpec("relu")

    def forward(self, x, train=False):
        self._mask = x > 0
        return x * self._mask

    def backward(self, dy):
        return dy * self._mask


class _Transpose(Layer):
    """Swap channel and time axes between conv1d and LSTM layouts."""

    kind = "transpose"

    def __repr__(self):
        return "Transpose()"

    def forward(self, x, train=False):
        return np.ascontiguousarray(x.transpose(0, 2, 1))

    def backward(self, dy):
        return np.ascontiguousarray(dy.transpose(0, 2, 1))


class Sequential(Layer):
    kind = "sequential"

    def __init__(self, layers):
        super().__init__()
        self.layers = list(layers)

    def forward(self, x, train=False):
        for layer in self.layers:
            x = layer.forward(x, train=train)
        return x

    def backward(self, dy):
        for layer in reversed(self.layers):
            dy = layer.backward(dy)
        return dy

    def zero_grad(self):
        for layer in self.layers:
            layer.zero_grad()

    def named_parameters(self, prefix=""):
        for idx, layer in enumerate(self.layers):
            yield from layer.named_parameters(f"{prefix}{idx}.{layer.kind}.")

    def __repr__(self):
        return "Sequential(\n" + "\n".join(f"  {layer!r}" for layer in self.layers) + "\n)"


def build_layer(spec, rng=None, dtype=np.float64, **kwargs):
    """Instantiate a layer from a :class:`LayerSpec`."""
    p = spec.params
    if spec.kind == "conv1d":
        return Conv1d(p["in_channels"], p["out_channels"], p["kernel_size"], rng=rng, dtype=dtype)
    if spec.kind == "lstm":
        return LSTM(p["input_size"], p["hidden_size"], p["num_layers"], rng=rng, dtype=dtype,
                    **kwargs)
    if spec.kind == "dense":
        return Dense(p["in_width"], p["out_width"], rng=rng, dtype=dtype)
    if spec.kind == "dropout":
        return Dropout(p["keep_prob"], rng=rng)
    return {"sigmoid": Sigmoid, "tanh": Tanh, "relu": ReLU}[spec.kind]()
