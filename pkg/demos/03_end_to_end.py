"""From synthetic recordings to per-window verdicts.

Generates the default 7-class corpus, trains the network on a stratified 30%
share, compares it with a 5-nearest-neighbour baseline, and then replays a
recording that develops a fault halfway through a window. Takes about half a
minute on one core.
"""
# %%
import numpy as np

from wavediag import pipeline, synth
from wavediag.signal import window_iter

cfg = synth.SynthConfig(seed=0)
recs = synth.generate_dataset(cfg)
print(f"{len(recs)} recordings of {len(recs[0])} samples, channels {recs[0].channel_names}")

# %% train
result = pipeline.run_training(recs, split=0.3, split_seed=0)
print(result.report.to_text())
print(result.test_metrics.to_text("network, held-out"))

# %% baseline on the identical split and normalization
stats = result.model.normalizer
knn_model = pipeline.fit_knn(result.train, stats, k=5)
print(pipeline.evaluate_knn(knn_model, stats, result.test).to_text("5-NN, held-out"))

# %% a switch from Normal to S1 after 14 of the 20 compressed points of window 2
replay = synth.generate_transition("Normal", "S1", 2 * 160 + 14 * 8, 160 * 6, synth.SynthConfig(seed=99))
for i, v in enumerate(pipeline.stream_verdicts(result.model, window_iter(replay, 160))):
    codes = "".join("?" if d.code is None else str(d.code) for d in v.window)
    print(f"window {i}: {codes}  -> {v.to_json_obj(i)['final']:<6} ({v.rule.value})")
