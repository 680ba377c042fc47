"""Mini-batch Adam training and evaluation for the fusion network."""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..dsp import FusionSample, stack_samples
from ..errors import InvalidArgumentError, NumericalFailure
from ..neural.losses import get_loss
from ..neural.optim import Adam
from .metrics import roc_auc, threshold_metrics

logger = logging.getLogger(__name__)


def _as_arrays(samples):
    if isinstance(samples, tuple):
        X, y, w = samples
        return np.asarray(X), np.asarray(y, dtype=np.float64), np.asarray(w, dtype=np.float64)
    if samples and isinstance(samples[0], FusionSample):
        return stack_samples(samples)
    raise InvalidArgumentError("expected a list of FusionSample or an (X, y, w) tuple")


def chronological_split(n, train_fraction=0.8, gap=0):
    """Train on the first block, test on the last; ``gap`` windows in between are dropped
    so overlapping windows never straddle the boundary."""
    n_train = int(round(n * train_fraction))
    test_start = n_train + gap
    if n_train < 1 or test_start >= n:
        raise InvalidArgumentError(
            f"{n} samples too few for a {train_fraction:.0%} split with a gap of {gap}")
    return np.arange(n_train), np.arange(test_start, n)


@dataclass
class TrainingHistory:
    epochs: list = field(default_factory=list)
    train_loss: list = field(default_factory=list)
    test_loss: list = field(default_factory=list)
    initial_train_loss: float = float("nan")
    initial_test_loss: float = float("nan")

    def append(self, epoch, train_loss, test_loss):
        self.epochs.append(epoch)
        self.train_loss.append(train_loss)
        self.test_loss.append(test_loss)

    def rows(self):
        return list(zip(self.epochs, self.train_loss, self.test_loss))

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["epoch", "train_loss", "test_loss"])
            for e, tr, te in self.rows():
                w.writerow([e, f"{tr:.8f}", f"{te:.8f}"])
        return path

    @classmethod
    def from_csv(cls, path):
        hist = cls()
        with Path(path).open(newline="") as fh:
            for row in csv.DictReader(fh):
                hist.append(int(row["epoch"]), float(row["train_loss"]), float(row["test_loss"]))
        return hist


@dataclass
class Metrics:
    loss: float
    accuracy: float
    precision: float
    recall: float
    roc_auc: float
    n: int
    threshold: float = 0.5
    train_curve: list = field(default_factory=list)
    test_curve: list = field(default_factory=list)
    predictions: np.ndarray = None
    labels: np.ndarray = None

    def to_dict(self):
        return {
            "loss": self.loss, "accuracy": self.accuracy, "precision": self.precision,
            "recall": self.recall, "roc_auc": self.roc_auc, "n": self.n,
            "threshold": self.threshold, "train_curve": list(self.train_curve),
            "test_curve": list(self.test_curve),
        }


def _loss(kind, pred, y, w):
    fn = get_loss(kind)
    if kind == "mse":
        return fn(pred, y)
    return fn(pred, y, w)


def _batch_loss(net, X, y, w, kind, batch=256):
    total = 0.0
    for i in range(0, len(y), batch):
        p = net.forward(X[i : i + batch], train=False)
        total += _loss(kind, p, y[i : i + batch], w[i : i + batch])[0] * len(p)
    return total / len(y)


def train(net, samples, cfg=None, split=None, progress=None):
    """Fit ``net`` and return ``(net, history)``.

    ``split`` is ``(train_idx, test_idx)``; by default the samples are split
    chronologically with a gap of G windows. Training data is reshuffled each
    epoch with the network's shuffle stream.
    """
    cfg = cfg or net.cfg
    X, y, w = _as_arrays(samples)
    if split is None:
        split = chronological_split(len(y), cfg.train_fraction, gap=cfg.G)
    train_idx, test_idx = split
    if len(train_idx) < 2 * cfg.batch:
        raise InvalidArgumentError(
            f"need at least {2 * cfg.batch} training samples, got {len(train_idx)}")
    Xtr, ytr, wtr = X[train_idx], y[train_idx], w[train_idx]
    Xte, yte, wte = X[test_idx], y[test_idx], w[test_idx]
    opt = Adam(learning_rate=cfg.learning_rate)
    hist = TrainingHistory()
    hist.initial_train_loss = _batch_loss(net, Xtr, ytr, wtr, cfg.loss)
    hist.initial_test_loss = _batch_loss(net, Xte, yte, wte, cfg.loss)

    for epoch in range(1, cfg.epochs + 1):
        order = net.shuffle_rng.permutation(len(ytr))
        total = 0.0
        for b, start in enumerate(range(0, len(order), cfg.batch)):
            idx = order[start : start + cfg.batch]
            net.zero_grad()
            pred = net.forward(Xtr[idx], train=True)
            loss, grad = _loss(cfg.loss, pred, ytr[idx], wtr[idx])
            if not np.isfinite(loss):
                raise NumericalFailure(f"non-finite loss at epoch {epoch}, batch {b}",
                                       where=(epoch, b))
            net.backward(grad)
            opt.step(net.named_parameters())
            bad = next((n for n, p, _ in net.named_parameters() if not np.isfinite(p).all()), None)
            if bad is not None:
                raise NumericalFailure(f"parameter {bad} became non-finite at epoch {epoch}, "
                                       f"batch {b}", where=(epoch, b))
            total += loss * len(idx)
        test_loss = _batch_loss(net, Xte, yte, wte, cfg.loss)
        hist.append(epoch, total / len(ytr), test_loss)
        logger.info("epoch %d train %.4f test %.4f", epoch, total / len(ytr), test_loss)
        if progress is not None:
            progress(epoch, total / len(ytr), test_loss)
    return net, hist


def evaluate(net, samples, threshold=0.5, loss="weighted_bce", history=None):
    """Metrics over ``samples``; ``predictions``/``labels`` hold the fitted sequence."""
    X, y, w = _as_arrays(samples)
    if len(y) == 0:
        raise InvalidArgumentError("evaluate needs at least one sample")
    pred = net.predict(X)
    stats = threshold_metrics(pred, y, threshold)
    return Metrics(
        loss=_loss(loss, pred, y, w)[0],
        roc_auc=roc_auc(pred, y),
        n=int(len(y)),
        threshold=threshold,
        train_curve=list(history.train_loss) if history else [],
        test_curve=list(history.test_loss) if history else [],
        predictions=pred,
        labels=y.astype(np.int64),
        **stats,
    )


def write_predictions_csv(path, steps, predictions, truth):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "pred", "truth"])
        for t, p, y in zip(steps, predictions, truth):
            w.writerow([f"{float(t):g}", f"{float(p):.6f}", int(y)])
    return path
