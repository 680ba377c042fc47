"""Threshold metrics and trapezoidal ROC-AUC."""

import numpy as np


def roc_curve(scores, labels):
    """(fpr, tpr) over every unique score threshold, highest first; ties move together."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    order = np.argsort(-scores, kind="mergesort")
    s, y = scores[order], labels[order]
    last_of_tie = np.r_[np.flatnonzero(np.diff(s)), s.size - 1]
    tp = np.cumsum(y)[last_of_tie]
    fp = np.cumsum(~y)[last_of_tie]
    pos, neg = y.sum(), (~y).sum()
    tpr = np.r_[0.0, tp / pos] if pos else np.full(tp.size + 1, np.nan)
    fpr = np.r_[0.0, fp / neg] if neg else np.full(fp.size + 1, np.nan)
    return fpr, tpr


def roc_auc(scores, labels):
    """Area under the ROC curve; NaN when only one class is present."""
    labels = np.asarray(labels).astype(bool)
    if labels.size == 0 or labels.all() or not labels.any():
        return float("nan")
    fpr, tpr = roc_curve(scores, labels)
    return float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))


def threshold_metrics(scores, labels, threshold=0.5):
    """Accuracy, precision and recall predicting class 1 only when score > threshold."""
    pred = np.asarray(scores) > threshold
    y = np.asarray(labels).astype(bool)
    tp = int(np.sum(pred & y))
    fp = int(np.sum(pred & ~y))
    fn = int(np.sum(~pred & y))
    n = y.size
    return {
        "accuracy": float(np.mean(pred == y)) if n else float("nan"),
        "precision": tp / (tp + fp) if tp + fp else 0.0,
        "recall": tp / (tp + fn) if tp + fn else 0.0,
    }
