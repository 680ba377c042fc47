"""
Empirical mode decomposition
============================

Sift a two-tone signal into intrinsic mode functions and check that the
pieces add back up.
"""

# %%
from pathlib import Path

import numpy as np

from lifefuse.dsp import EmdConfig, emd_decompose, envelope, is_imf
from lifefuse.plots import line_chart_svg, write_svg

OUT = Path(__file__).with_name("out")
OUT.mkdir(exist_ok=True)

t = np.arange(512) / 64.0
fast, slow = np.sin(2 * np.pi * 2 * t), np.sin(2 * np.pi * 0.25 * t)
x = fast + slow

# %%
# the mixture has the right extrema count but a wandering envelope mean
print("is_imf(x):", is_imf(x), " is_imf(fast):", is_imf(fast))
mean_env = 0.5 * (envelope(x, "upper") + envelope(x, "lower"))

# %%
res = emd_decompose(x, EmdConfig(sift_sd_threshold=0.3))
print(len(res.imfs), "IMFs; sifting iterations", res.sift_iterations)
print("corr(IMF_1, 2 Hz) =", round(float(np.corrcoef(res.imfs[0], fast)[0, 1]), 4))
print("reconstruction error", np.max(np.abs(res.reconstruct() - x)))

# %%
series = {"signal": (t, x), "envelope mean": (t, mean_env)}
series.update({f"IMF {k + 1}": (t, imf) for k, imf in enumerate(res.imfs)})
series["residual"] = (t, res.residual)
write_svg(OUT / "emd.svg", line_chart_svg(series, "two-tone sifting", "time (s)", "value"))
