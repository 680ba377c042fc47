"""Seeded end-to-end fusion runs: simulate a scenario, train, score the held-out block."""

import time
from dataclasses import dataclass, field

import numpy as np

from .dsp import window_arrays
from .fusion import (
    FusionNetwork,
    chronological_split,
    ds_fuse_probabilities,
    evaluate,
    preset,
    roc_auc,
    train,
)
from .simulate import SENSORS, scenario, simulate_probability_streams


def held_out_report(net, streams):
    """Metrics on the chronological test block of ``streams`` for a trained ``net``.

    Besides the network's own :class:`~lifefuse.fusion.Metrics` this scores each
    raw sensor stream and the Dempster-Shafer baseline (combined m(life)) on
    the same decision steps.
    """
    cfg = net.cfg
    X, y, ends = window_arrays(streams, cfg.G, cfg.H)
    _, test = chronological_split(len(y), cfg.train_fraction, gap=cfg.G)
    metrics = evaluate(net, (X[test], y[test], np.ones(len(test))), loss=cfg.loss)
    steps = ends[test]
    probs = streams.probs[:, steps]
    return {
        "metrics": metrics,
        "steps": steps,
        "ds_auc": roc_auc(ds_fuse_probabilities(probs)[0], y[test]),
        "single_auc": {s: roc_auc(probs[i], y[test]) for i, s in enumerate(SENSORS)},
    }


@dataclass
class ExperimentResult:
    cfg: object
    history: object
    net: object
    streams: object
    report: dict
    seconds: float
    extra: dict = field(default_factory=dict)

    @property
    def auc(self):
        return self.report["metrics"].roc_auc

    @property
    def best_single_auc(self):
        return max(self.report["single_auc"].values())

    @property
    def ds_auc(self):
        return self.report["ds_auc"]


def run_fusion_experiment(scenario_name="standard", seed=0, preset_name="compact",
                          scenario_overrides=None, **fusion_changes):
    """Simulate ``scenario_name`` with ``seed``, train a fresh network seeded alike,
    and score it on the held-out block."""
    start = time.perf_counter()
    streams = simulate_probability_streams(
        scenario(scenario_name, seed=seed, **(scenario_overrides or {})))
    cfg = preset(preset_name, seed=seed, **fusion_changes)
    X, y, _ = window_arrays(streams, cfg.G, cfg.H)
    net, hist = train(FusionNetwork(cfg), (X, y, np.ones(len(y))), cfg)
    report = held_out_report(net, streams)
    return ExperimentResult(cfg, hist, net, streams, report, time.perf_counter() - start)
