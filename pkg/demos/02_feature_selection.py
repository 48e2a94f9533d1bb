"""Choosing non-redundant channels from a correlation matrix.

Eight measured currents, several of which move together. The greedy pass
keeps the best-connected channels, drops the ones they make redundant, and
the fine-tune step brings back the least redundant of the dropped ones.
"""
# %%
import numpy as np

from wavediag.correlation import correlation_matrix, degree, select_features
from wavediag.signal import Recording

rng = np.random.default_rng(3)
n = 5000
drive, load, bus = rng.normal(size=(3, n))
channels = {
    "I_hau": drive,
    "I_9": drive + 0.3 * rng.normal(size=n),
    "I_10": 0.8 * drive + 0.4 * rng.normal(size=n),
    "I_RL": load,
    "I_2": drive + 0.5 * load,
    "I_12": bus,
    "V_th": bus + 0.4 * rng.normal(size=n),
    "I_11": 0.7 * drive + 0.3 * bus + 0.6 * rng.normal(size=n),
}
rec = Recording(tuple(channels), 16_000.0, np.stack(list(channels.values())))

# %%
cm = correlation_matrix(rec)
print("         " + " ".join(f"{c:>6}" for c in cm.names))
for name, row in zip(cm.names, cm.r):
    print(f"{name:>8} " + " ".join(f"{v:6.2f}" for v in row))

print("\nI_hau vs I_9 is", degree(cm["I_hau", "I_9"]).name)

# %%
report = select_features(cm, redundancy_threshold=0.5, fine_tune_count=1)
print()
print(report.to_text())
