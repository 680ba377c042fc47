"""Losses returning ``(mean loss, gradient w.r.t. prediction)``."""

import numpy as np

from ..errors import InvalidArgumentError

CLIP = 1e-7


def weighted_bce(pred, target, weight=None, clip=CLIP):
    """Per-element ``-w * [y log x + (1 - y) log(1 - x)]`` averaged over elements.

    Each log argument is floored at ``clip`` so a confident wrong prediction
    costs at most ``-log(clip)`` while a perfect one costs exactly 0. Where
    the floor is active the gradient is zero. Weights are treated as constants.
    """
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise InvalidArgumentError(f"shape mismatch {pred.shape} vs {target.shape}")
    if not np.all((target == 0.0) | (target == 1.0)):
        raise InvalidArgumentError("weighted_bce targets must be 0 or 1")
    weight = np.ones_like(pred) if weight is None else np.broadcast_to(
        np.asarray(weight, dtype=np.float64), pred.shape)
    if np.any(weight < 0):
        raise InvalidArgumentError("loss weights must be non-negative")
    n = max(pred.size, 1)
    pos = target == 1.0
    arg = np.where(pos, pred, 1.0 - pred)  # probability given to the true class
    live = arg > clip
    per = -weight * np.log(np.maximum(arg, clip))
    darg = np.where(live, -weight / np.where(live, arg, 1.0), 0.0)
    grad = np.where(pos, darg, -darg) / n
    return float(per.sum() / n), grad


def mse(pred, target):
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise InvalidArgumentError(f"shape mismatch {pred.shape} vs {target.shape}")
    diff = pred - target
    n = max(pred.size, 1)
    return float(np.sum(diff * diff) / n), 2.0 * diff / n


LOSSES = {"weighted_bce": weighted_bce, "bce": weighted_bce, "mse": mse}


def get_loss(kind):
    try:
        return LOSSES[kind]
    except KeyError:
        raise InvalidArgumentError(f"unknown loss {kind!r}; expected one of {sorted(LOSSES)}")
