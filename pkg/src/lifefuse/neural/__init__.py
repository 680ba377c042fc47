"""From-scratch differentiable building blocks."""

from .gradcheck import grad_check, relative_error
from .layers import (
    LSTM,
    Conv1d,
    Dense,
    Dropout,
    Layer,
    LayerSpec,
    ReLU,
    Sequential,
    Sigmoid,
    Tanh,
    build_layer,
    conv1d,
    conv1d_backward,
    dropout,
    lstm_cell,
    lstm_cell_backward,
    lstm_sequence,
)
from .losses import get_loss, mse, weighted_bce
from .optim import Adam, AdamState, adam_step
