"""
Training the fusion network
===========================

Three synthetic probability streams (UWB, infrared, acoustic), G-wide
raw+smoothed windows, and the three-branch conv/LSTM fusion net. About a
minute on one core with the compact preset.
"""

# %%
from pathlib import Path

from lifefuse.experiments import run_fusion_experiment
from lifefuse.fusion import FusionConfig, FusionNetwork, preset
from lifefuse.plots import fit_chart, loss_chart, write_svg

OUT = Path(__file__).with_name("out")
OUT.mkdir(exist_ok=True)

# %%
print(FusionNetwork(FusionConfig(G=64)))
print(FusionNetwork(preset("compact")))

# %%
run = run_fusion_experiment("standard", seed=0, preset_name="compact")
h = run.history
print(f"train loss {h.initial_train_loss:.3f} -> {h.train_loss[-1]:.3f}, test {h.test_loss[-1]:.3f}"
      f" in {run.seconds:.0f} s")
m = run.report["metrics"]
print(f"held-out accuracy {m.accuracy:.3f}, AUC {m.roc_auc:.3f}")

# %%
h.to_csv(OUT / "fusion_history.csv")
write_svg(OUT / "fusion_loss.svg", loss_chart(h, title="fusion loss"))
steps = run.report["steps"][:400]
write_svg(OUT / "fusion_fit.svg", fit_chart(steps, m.predictions[:400], m.labels[:400]))
