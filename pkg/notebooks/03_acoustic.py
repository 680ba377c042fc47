"""
Acoustic detectors
==================

Knocks and breathing in noise. Two detectors: sub-band similarity (lifeless
recordings look alike in every band) and a small conv + LSTM classifier.
"""

# %%
import numpy as np

from lifefuse.detectors import acoustic_cnn_detect, acoustic_correlation_probability, \
    train_acoustic_detector
from lifefuse.detectors.acoustic import make_acoustic_dataset
from lifefuse.simulate import simulate_acoustic

presence = np.r_[np.ones(30, dtype=int), np.zeros(30, dtype=int)]
sig, clean = simulate_acoustic(presence, noise_std=0.3, seed=1, return_clean=True)
print(sig.size, "samples at 100 Hz")

# %%
for label, part in (("occupied", sig[:3000]), ("empty", sig[3000:])):
    print(f"{label:9s} correlation-detector probability {acoustic_correlation_probability(part):.3f}")

# %% [markdown]
# Both read high. Broadband noise decorrelates the sub-bands whether or not
# anyone is there, so similarity alone barely separates the classes at this
# noise level. The learned detector does much better.
#
# The classifier is trained on one-second windows from many short
# independent recordings at 0 dB.

# %%
model = train_acoustic_detector(n_steps=600, seed=0)
X, y, noise_std = make_acoustic_dataset(300, seed=5)
p = model.predict(X)
print(f"held-out accuracy {np.mean((p > 0.5) == y):.3f}")

noise = simulate_acoustic(np.zeros(100, dtype=int), noise_std=noise_std, seed=3)
print(f"mean probability on pure noise {np.mean([acoustic_cnn_detect(w, model) for w in noise.reshape(100, 100)]):.3f}")
