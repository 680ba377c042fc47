"""``lifefuse`` command line: simulate, train-uwb, train-fusion, eval, sweep, report.

Runs are driven by a JSON config (``--config``) plus dotted ``--set key=value``
overrides. Every output directory gets a ``manifest.json`` with the config
hash, the seed and a sha256 per artifact.

Exit status: 0 ok, 2 validation/usage error, 3 numerical failure.
"""

import argparse
import copy
import hashlib
import json
import logging
import os
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import plots
from .detectors.uwb import default_pulse, simulate_uwb_scene, train_uwb_detector
from .dsp import window_arrays
from .echo_io import sidecar_path, write_echo_matrix
from .errors import InvalidArgumentError, LifeFuseError, NumericalFailure
from .experiments import held_out_report
from .fusion import (
    FusionNetwork,
    TrainingHistory,
    load_fusion_checkpoint,
    preset,
    save_fusion_checkpoint,
    train,
    write_predictions_csv,
)
from .fusion.config import PRESETS, FusionConfig
from .simulate import (
    SCENARIOS,
    SENSORS,
    ScenarioConfig,
    SensorProfile,
    scenario,
    simulate_probability_streams,
)
from .streams import load_streams_csv, write_streams_csv

logger = logging.getLogger("lifefuse")

COMMANDS = ("simulate", "train-uwb", "train-fusion", "eval", "sweep", "report")

# variant name -> FusionConfig changes relative to the sweep's base config.
# Even smoothing widths are rejected, so smooth10 runs the nearest centred window.
SWEEP_VARIANTS = {
    "layer3": {"branch_lstm_layers": 3},
    "layer4": {"branch_lstm_layers": 4},
    "layer5": {"branch_lstm_layers": 5},
    "conv1": {"conv_kernel": 1},
    "conv3": {"conv_kernel": 3},
    "drop0_7": {"keep_prob": 0.7},
    "drop0_8": {"keep_prob": 0.8},
    "smooth5": {"H": 5},
    "smooth10": {"H": 11},
}

DEFAULTS = {
    "seed": 0,
    "emit_plots": False,
    "scenario": {"name": "standard"},
    "fusion": {"preset": "default"},
    "uwb": {"n_scenes": 200, "validation_scenes": 40, "epochs": 12, "window": 128,
            "snr_db": 10.0, "echo_scenes": 2, "echo_M": 256, "echo_N": 64},
    "paths": {"out": "lifefuse-out", "streams": None, "checkpoint": None, "history": None,
              "predictions": None},
    "sweep": {"variants": list(SWEEP_VARIANTS)},
}

_SCENARIO_KEYS = {f.name for f in fields(ScenarioConfig)} - {"seed", "sensor_profiles"}
_PROFILE_KEYS = {f.name for f in fields(SensorProfile)}
_FUSION_KEYS = {f.name for f in fields(FusionConfig)} - {"seed"}


class UsageError(InvalidArgumentError):
    pass


def _check_key(path):
    """Raise :class:`UsageError` naming ``path`` unless it addresses a config entry."""
    parts = path.split(".")
    head, rest = parts[0], parts[1:]
    ok = False
    if head in ("seed", "emit_plots"):
        ok = not rest
    elif head == "scenario" and rest:
        if rest[0] == "sensor_profiles":
            ok = (len(rest) == 1 or (rest[1] in SENSORS
                  and (len(rest) == 2 or (len(rest) == 3 and rest[2] in _PROFILE_KEYS))))
        else:
            ok = len(rest) == 1 and (rest[0] == "name" or rest[0] in _SCENARIO_KEYS)
    elif head == "fusion" and rest:
        ok = len(rest) == 1 and (rest[0] == "preset" or rest[0] in _FUSION_KEYS)
    elif head in ("uwb", "paths", "sweep") and rest:
        ok = len(rest) == 1 and rest[0] in DEFAULTS[head]
    if not ok:
        raise UsageError(f"unknown config key {path!r}")


def _flatten(d, prefix=""):
    for k, v in d.items():
        if isinstance(v, dict):
            yield from _flatten(v, f"{prefix}{k}.")
        else:
            yield f"{prefix}{k}", v


def _set(d, path, value):
    parts = path.split(".")
    for p in parts[:-1]:
        d = d.setdefault(p, {})
    d[parts[-1]] = value


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def build_config(config_path=None, overrides=(), env=None):
    """Resolved run config: defaults, then the JSON file, then ``key=value`` overrides,
    then ``LIFEFUSE_SEED``."""
    env = os.environ if env is None else env
    cfg = copy.deepcopy(DEFAULTS)
    updates = []
    if config_path is not None:
        try:
            user = json.loads(Path(config_path).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read config {config_path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {config_path} is not valid JSON: {exc}") from None
        if not isinstance(user, dict):
            raise UsageError("config must be a JSON object")
        updates += list(_flatten(user))
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"override {item!r} is not key=value")
        updates.append((key.strip(), _parse_value(value)))
    for key, value in updates:
        _check_key(key)
        _set(cfg, key, value)
    if env.get("LIFEFUSE_SEED"):
        try:
            cfg["seed"] = int(env["LIFEFUSE_SEED"])
        except ValueError:
            raise UsageError(f"LIFEFUSE_SEED={env['LIFEFUSE_SEED']!r} is not an integer") from None
    if not isinstance(cfg["seed"], int) or cfg["seed"] < 0:
        raise UsageError(f"seed must be a non-negative integer, got {cfg['seed']!r}")
    scenario_config(cfg)
    fusion_config(cfg)
    return cfg


def scenario_config(cfg):
    sc = dict(cfg["scenario"])
    name = sc.pop("name", "standard")
    if name not in SCENARIOS:
        raise UsageError(f"unknown scenario {name!r}")
    profiles = sc.pop("sensor_profiles", None)
    if profiles:
        merged = copy.deepcopy(SCENARIOS[name].get("sensor_profiles", {}))
        for sensor, values in profiles.items():
            merged.setdefault(sensor, {}).update(values)
        sc["sensor_profiles"] = merged
    out = scenario(name, seed=cfg["seed"], **sc)
    out.validate()
    return out


def fusion_config(cfg, **changes):
    fc = dict(cfg["fusion"])
    name = fc.pop("preset", "default")
    if name not in PRESETS:
        raise UsageError(f"unknown fusion preset {name!r}")
    fc.update(changes)
    return preset(name, seed=cfg["seed"], **fc)


def config_hash(cfg):
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out, command, cfg, artifacts):
    """Write ``manifest.json``; artifacts recorded by earlier commands in the same
    directory are kept (and re-hashed) if they still exist."""
    out = Path(out)
    path = out / "manifest.json"
    runs, names = [], {str(Path(a).relative_to(out)) for a in artifacts}
    if path.exists():
        try:
            old = json.loads(path.read_text())
            runs = list(old.get("runs", []))
            names |= {n for n in old.get("artifacts", {}) if (out / n).exists()}
        except json.JSONDecodeError:
            pass
    runs.append({"command": command, "config_hash": config_hash(cfg), "seed": cfg["seed"]})
    manifest = {
        "command": command,
        "config": cfg,
        "config_hash": config_hash(cfg),
        "seed": cfg["seed"],
        "artifacts": {n: _sha256(out / n) for n in sorted(names)},
        "runs": runs,
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _streams(cfg):
    src = cfg["paths"]["streams"]
    if src:
        return load_streams_csv(src)
    return simulate_probability_streams(scenario_config(cfg))


def _out(cfg):
    out = Path(cfg["paths"]["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _history_from(losses, val):
    hist = TrainingHistory()
    for e, tr in enumerate(losses, 1):
        hist.append(e, float(tr), float(val[e - 1]) if val else float("nan"))
    return hist


def cmd_simulate(cfg):
    out = _out(cfg)
    streams = simulate_probability_streams(scenario_config(cfg))
    arts = [write_streams_csv(streams, out / "streams.csv")]
    u = cfg["uwb"]
    rng = np.random.default_rng(cfg["seed"])
    pulse = default_pulse()
    for i in range(int(u["echo_scenes"])):
        present = i % 2 == 0
        echo = simulate_uwb_scene(rng, present, pulse, M=int(u["echo_M"]), N=int(u["echo_N"]),
                                  snr_db=float(u["snr_db"]))
        path = out / f"echo_{i:03d}_{'present' if present else 'absent'}.bin"
        write_echo_matrix(echo, path)
        arts += [path, sidecar_path(path)]
    print(f"simulate: {len(streams)} steps, {int(u['echo_scenes'])} echo matrices -> {out}")
    return out, arts


def cmd_train_uwb(cfg):
    out = _out(cfg)
    u = cfg["uwb"]
    model = train_uwb_detector(int(u["n_scenes"]), seed=cfg["seed"], window=int(u["window"]),
                               epochs=int(u["epochs"]),
                               validation_scenes=int(u["validation_scenes"]),
                               snr_db=float(u["snr_db"]))
    hist = _history_from(model.history, model.val_history)
    arts = [model.save(out / "uwb.ckpt", kind="uwb_detector"), hist.to_csv(out / "history.csv")]
    if cfg["emit_plots"]:
        arts.append(plots.write_svg(out / "loss.svg", plots.loss_chart(hist, title="UWB detector")))
    print(f"train-uwb: final train loss {hist.train_loss[-1]:.4f}, "
          f"held-out {hist.test_loss[-1]:.4f} -> {out}")
    return out, arts


def _fit(cfg, fcfg, streams):
    X, y, _ = window_arrays(streams, fcfg.G, fcfg.H)
    net = FusionNetwork(fcfg)
    net, hist = train(net, (X, y, np.ones(len(y))), fcfg)
    return net, hist


def cmd_train_fusion(cfg):
    out = _out(cfg)
    fcfg = fusion_config(cfg)
    streams = _streams(cfg)
    net, hist = _fit(cfg, fcfg, streams)
    arts = [save_fusion_checkpoint(net, out / "fusion.ckpt"), hist.to_csv(out / "history.csv")]
    if cfg["emit_plots"]:
        arts.append(plots.write_svg(out / "loss.svg", plots.loss_chart(hist, title="fusion loss")))
    print(f"train-fusion: {len(streams) - fcfg.G} windows, train {hist.train_loss[-1]:.4f}, "
          f"test {hist.test_loss[-1]:.4f} -> {out}")
    return out, arts


def cmd_eval(cfg):
    out = _out(cfg)
    ckpt = cfg["paths"]["checkpoint"]
    if not ckpt:
        raise UsageError("eval needs paths.checkpoint")
    net = load_fusion_checkpoint(ckpt)
    streams = _streams(cfg)
    held = held_out_report(net, streams)
    m, steps = held["metrics"], held["steps"]
    report = m.to_dict()
    report["ds_roc_auc"] = held["ds_auc"]
    report["single_roc_auc"] = held["single_auc"]
    metrics_path = out / "metrics.json"
    metrics_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    arts = [metrics_path,
            write_predictions_csv(out / "predictions.csv", streams.timestamps[steps],
                                  m.predictions, m.labels)]
    if cfg["emit_plots"]:
        arts.append(plots.write_svg(out / "fit.svg", plots.fit_chart(
            streams.timestamps[steps], m.predictions, m.labels)))
    print(f"eval: n={m.n} auc {m.roc_auc:.4f} (D-S {report['ds_roc_auc']:.4f}) "
          f"accuracy {m.accuracy:.4f} -> {out}")
    return out, arts


def cmd_sweep(cfg):
    out = _out(cfg)
    names = cfg["sweep"]["variants"]
    unknown = [n for n in names if n not in SWEEP_VARIANTS]
    if unknown:
        raise UsageError(f"unknown sweep variant {unknown[0]!r}")
    streams = _streams(cfg)
    base = fusion_config(cfg)
    done, arts, hists = {}, [], {}
    for name in names:
        fcfg = base.derive(**SWEEP_VARIANTS[name])
        key = json.dumps(fcfg.to_dict(), sort_keys=True)
        if key not in done:
            done[key] = _fit(cfg, fcfg, streams)[1]
        hist = hists[name] = done[key]
        (out / name).mkdir(exist_ok=True)
        arts.append(hist.to_csv(out / name / "history.csv"))
        print(f"sweep {name}: train {hist.train_loss[-1]:.4f} test {hist.test_loss[-1]:.4f}",
              flush=True)
    comp = out / "comparison.csv"
    with comp.open("w") as fh:
        fh.write("variant,epoch,train_loss,test_loss\n")
        for name, hist in hists.items():
            for e, tr, te in hist.rows():
                fh.write(f"{name},{e},{tr:.8f},{te:.8f}\n")
    arts.append(comp)
    if cfg["emit_plots"]:
        arts += _sweep_plots(out, hists)
    return out, arts


def _sweep_plots(out, hists):
    return [plots.write_svg(out / f"{which}_loss.svg",
                            plots.loss_chart(hists, which=which, title=f"{which} loss"))
            for which in ("train", "test")]


def read_comparison(path):
    hists = {}
    with Path(path).open() as fh:
        header = fh.readline().strip().split(",")
        if header != ["variant", "epoch", "train_loss", "test_loss"]:
            raise InvalidArgumentError(f"{path}: not a comparison CSV")
        for line in fh:
            name, e, tr, te = line.strip().split(",")
            hists.setdefault(name, TrainingHistory()).append(int(e), float(tr), float(te))
    return hists


def cmd_report(cfg):
    out = _out(cfg)
    paths = cfg["paths"]
    hist_path = paths["history"] or (out / "history.csv")
    pred_path = paths["predictions"] or (out / "predictions.csv")
    arts = []
    if Path(hist_path).exists():
        with Path(hist_path).open() as fh:
            first = fh.readline()
        if first.startswith("variant,"):
            arts += _sweep_plots(out, read_comparison(hist_path))
        else:
            arts.append(plots.write_svg(out / "loss.svg", plots.loss_chart(
                TrainingHistory.from_csv(hist_path))))
    if Path(pred_path).exists():
        data = np.loadtxt(pred_path, delimiter=",", skiprows=1, ndmin=2)
        arts.append(plots.write_svg(out / "fit.svg",
                                    plots.fit_chart(data[:, 0], data[:, 1], data[:, 2])))
    if not arts:
        raise UsageError(f"report found neither {hist_path} nor {pred_path}")
    print(f"report: {len(arts)} chart(s) -> {out}")
    return out, arts


HANDLERS = {
    "simulate": cmd_simulate,
    "train-uwb": cmd_train_uwb,
    "train-fusion": cmd_train_fusion,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def make_parser():
    p = argparse.ArgumentParser(prog="lifefuse", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON run config")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="dotted override, e.g. fusion.G=32 (repeatable)")
    p.add_argument("--out", help="output directory (same as --set paths.out=DIR)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        overrides = list(args.overrides)
        if args.out:
            overrides.append(f"paths.out={json.dumps(args.out)}")
        cfg = build_config(args.config, overrides)
        out, arts = HANDLERS[args.command](cfg)
        write_manifest(out, args.command, cfg, arts)
    except NumericalFailure as exc:
        print(f"lifefuse: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (LifeFuseError, ValueError, OSError) as exc:
        print(f"lifefuse: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
