"""Haar compression of one window of converter current.

Walks through the orthonormal Haar pyramid on a short hand-made sequence and
then on a synthetic 160-sample window, which shrinks to the 20-point payload
a controller would ship.
"""
# %%
import numpy as np

from wavediag import synth, wavelet

x = np.array([48, 34, 24, 60, 72, 28, 55, 121], dtype=float)
a = x
for level in range(3):
    a, d = wavelet.haar_forward_step(a)
    print(f"step {level + 1}: approx {np.round(a, 4)}  detail {np.round(d, 4)}")

# %% energy is preserved at every step, so reconstruction is exact
pyr = wavelet.decompose(x, 3)
print("energy in :", np.sum(x ** 2))
print("energy out:", np.sum(pyr.approx ** 2) + sum(np.sum(d ** 2) for d in pyr.levels))
print("max round-trip error:", np.max(np.abs(wavelet.reconstruct(pyr) - x)))

# %% a 10 ms window at 16 kHz
cfg = synth.SynthConfig(seed=1)
rec = synth.generate_recording("S2", cfg, n_samples=160)
payload = wavelet.compress(rec.samples, levels=3)
print("raw window:", rec.samples.shape, "-> payload:", payload.shape)

# the approximation is a scaled local mean: dividing by 2**(3/2) recovers block averages
block_means = rec.samples.reshape(4, 20, 8).mean(axis=2)
print("payload / 2**1.5 matches block means:", np.allclose(payload / 2 ** 1.5, block_means))
