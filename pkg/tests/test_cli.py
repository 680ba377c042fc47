"""End-to-end runs of the ``lifefuse`` command line."""

import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from lifefuse import cli
from lifefuse.fusion import TrainingHistory, load_fusion_checkpoint
from lifefuse.streams import load_streams_csv

SMALL = ["fusion.preset=\"compact\"", "fusion.G=8", "fusion.epochs=2", "scenario.duration=300",
         "uwb.echo_scenes=1", "uwb.echo_M=64"]


def run(out, command, *sets, config=None):
    argv = [command, "--out", str(out)]
    for s in sets:
        argv += ["--set", s]
    if config:
        argv += ["--config", str(config)]
    return cli.main(argv)


@pytest.fixture(autouse=True)
def _no_env_seed(monkeypatch):
    monkeypatch.delenv("LIFEFUSE_SEED", raising=False)


class TestConfig:
    def test_unknown_key_exits_2_naming_it(self, tmp_path, capsys):
        assert run(tmp_path, "simulate", "fusion.colour=3") == 2
        assert "fusion.colour" in capsys.readouterr().err

    def test_unknown_key_in_file(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"scenario": {"lenght": 10}}))
        assert run(tmp_path, "simulate", config=cfg) == 2
        assert "scenario.lenght" in capsys.readouterr().err

    def test_unknown_command(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            cli.main(["fly", "--out", str(tmp_path)])
        assert info.value.code == 2

    @pytest.mark.parametrize("setting", ["fusion.G=4", "fusion.H=10", "scenario.name=\"desert\"",
                                         "seed=-1", "fusion.preset=\"giant\""])
    def test_invalid_values_exit_2(self, tmp_path, setting):
        assert run(tmp_path, "simulate", setting) == 2

    def test_precedence(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"seed": 4, "fusion": {"G": 16}}))
        cfg = cli.build_config(path, ["fusion.G=32"], env={"LIFEFUSE_SEED": "9"})
        assert cfg["fusion"]["G"] == 32 and cfg["seed"] == 9
        assert cli.fusion_config(cfg).seed == 9 and cli.scenario_config(cfg).seed == 9

    def test_profile_override_merges(self):
        cfg = cli.build_config(None, ["scenario.sensor_profiles.uwb.interference_rate=0.5"], env={})
        prof = cli.scenario_config(cfg).sensor_profiles["uwb"]
        assert prof.interference_rate == 0.5


class TestSimulate:
    def test_outputs_and_manifest(self, tmp_path):
        assert run(tmp_path, "simulate", *SMALL) == 0
        assert len(load_streams_csv(tmp_path / "streams.csv")) == 300
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["seed"] == 0 and len(manifest["config_hash"]) == 64
        assert set(manifest["artifacts"]) == {"streams.csv", "echo_000_present.bin",
                                              "echo_000_present.bin.json"}

    def test_rerun_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(a, "simulate", *SMALL) == 0 and run(b, "simulate", *SMALL) == 0
        for name in ("streams.csv", "echo_000_present.bin", "echo_000_present.bin.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()
        # the config (and its hash) records the output path, the artifact digests do not
        digests = [json.loads((d / "manifest.json").read_text())["artifacts"] for d in (a, b)]
        assert digests[0] == digests[1]

    def test_env_seed(self, tmp_path, monkeypatch):
        assert run(tmp_path / "s0", "simulate", *SMALL) == 0
        monkeypatch.setenv("LIFEFUSE_SEED", "7")
        assert run(tmp_path / "s7", "simulate", *SMALL) == 0
        assert json.loads((tmp_path / "s7" / "manifest.json").read_text())["seed"] == 7
        assert (tmp_path / "s0" / "streams.csv").read_bytes() != \
            (tmp_path / "s7" / "streams.csv").read_bytes()


class TestFusionPipeline:
    def test_train_eval_report(self, tmp_path):
        assert run(tmp_path, "simulate", *SMALL) == 0
        streams = f"paths.streams={json.dumps(str(tmp_path / 'streams.csv'))}"
        assert run(tmp_path, "train-fusion", *SMALL, streams, "emit_plots=true") == 0
        hist = TrainingHistory.from_csv(tmp_path / "history.csv")
        assert hist.epochs == [1, 2]
        assert load_fusion_checkpoint(tmp_path / "fusion.ckpt").cfg.G == 8

        ckpt = f"paths.checkpoint={json.dumps(str(tmp_path / 'fusion.ckpt'))}"
        assert run(tmp_path, "eval", *SMALL, streams, ckpt) == 0
        metrics = json.loads((tmp_path / "metrics.json").read_text())
        assert set(metrics["single_roc_auc"]) == {"uwb", "infrared", "acoustic"}
        assert 0 <= metrics["roc_auc"] <= 1 and 0 <= metrics["ds_roc_auc"] <= 1
        pred = np.loadtxt(tmp_path / "predictions.csv", delimiter=",", skiprows=1)
        assert pred.shape == (metrics["n"], 3)

        (tmp_path / "loss.svg").unlink()
        assert run(tmp_path, "report") == 0
        for name in ("loss.svg", "fit.svg"):
            assert ET.parse(tmp_path / name).getroot().tag.endswith("svg")
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert {"fusion.ckpt", "history.csv", "metrics.json", "predictions.csv", "fit.svg",
                "loss.svg", "streams.csv"} <= set(manifest["artifacts"])
        assert [r["command"] for r in manifest["runs"]] == ["simulate", "train-fusion", "eval",
                                                            "report"]

    def test_training_rerun_byte_identical(self, tmp_path):
        for d in ("a", "b"):
            assert run(tmp_path / d, "train-fusion", *SMALL) == 0
        for name in ("history.csv", "fusion.ckpt"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_window_count_at_g64(self, tmp_path, capsys):
        assert run(tmp_path, "simulate", "scenario.duration=1000", "uwb.echo_scenes=0") == 0
        streams = f"paths.streams={json.dumps(str(tmp_path / 'streams.csv'))}"
        tiny = ["fusion.preset=\"compact\"", "fusion.G=64", "fusion.conv_channels=2",
                "fusion.branch_hidden=2", "fusion.fusion_hidden_1=4", "fusion.fusion_hidden_2=3",
                "fusion.dense_widths=[2]"]
        assert run(tmp_path, "train-fusion", streams, *tiny) == 0
        assert "936 windows" in capsys.readouterr().out
        assert TrainingHistory.from_csv(tmp_path / "history.csv").epochs == list(range(1, 21))

    def test_eval_needs_checkpoint(self, tmp_path):
        assert run(tmp_path, "eval", *SMALL) == 2

    def test_report_without_inputs(self, tmp_path):
        assert run(tmp_path, "report") == 2

    def test_numerical_failure_exits_3(self, tmp_path, monkeypatch, capsys):
        from lifefuse.fusion import training

        def nan_loss(kind, pred, y, w):
            return float("nan"), np.zeros_like(pred)

        monkeypatch.setattr(training, "_loss", nan_loss)
        assert run(tmp_path, "train-fusion", *SMALL) == 3
        assert "epoch 1, batch 0" in capsys.readouterr().err


class TestSweepAndUwb:
    def test_sweep(self, tmp_path):
        assert run(tmp_path, "sweep", *SMALL, "fusion.epochs=1", "emit_plots=true") == 0
        for name in cli.SWEEP_VARIANTS:
            assert TrainingHistory.from_csv(tmp_path / name / "history.csv").epochs == [1]
        rows = (tmp_path / "comparison.csv").read_text().splitlines()
        assert rows[0] == "variant,epoch,train_loss,test_loss" and len(rows) == 10
        # identical configurations are trained once and share their history
        assert (tmp_path / "layer3" / "history.csv").read_bytes() == \
            (tmp_path / "conv3" / "history.csv").read_bytes()
        assert (tmp_path / "layer3" / "history.csv").read_bytes() != \
            (tmp_path / "layer5" / "history.csv").read_bytes()
        for which in ("train", "test"):
            ET.parse(tmp_path / f"{which}_loss.svg")

    def test_unknown_variant(self, tmp_path):
        assert run(tmp_path, "sweep", *SMALL, "sweep.variants=[\"layer9\"]") == 2

    def test_report_from_comparison(self, tmp_path):
        assert run(tmp_path, "sweep", *SMALL, "fusion.epochs=1",
                   "sweep.variants=[\"layer3\",\"conv1\"]") == 0
        comp = f"paths.history={json.dumps(str(tmp_path / 'comparison.csv'))}"
        assert run(tmp_path, "report", comp) == 0
        assert (tmp_path / "train_loss.svg").exists() and (tmp_path / "test_loss.svg").exists()

    def test_train_uwb(self, tmp_path):
        assert run(tmp_path, "train-uwb", "uwb.n_scenes=8", "uwb.validation_scenes=4",
                   "uwb.epochs=2", "uwb.window=32", "uwb.echo_M=64") == 0
        hist = TrainingHistory.from_csv(tmp_path / "history.csv")
        assert hist.epochs == [1, 2] and np.all(np.isfinite(hist.test_loss))
        assert (tmp_path / "uwb.ckpt").exists()
