import numpy as np
import pytest

from wavediag import preprocess, synth
from wavediag.pipeline import points_from_recordings
from wavediag.signal import ClassLabel


def test_default_dataset_shape():
    recs = synth.generate_dataset(synth.SynthConfig())
    assert len(recs) == 7
    for code, rec in enumerate(recs):
        assert rec.samples.shape == (4, 32_768)
        assert rec.channel_names == synth.CHANNELS
        assert np.all(rec.labels == code)
    assert len(points_from_recordings(recs)) == 7 * 4096


def test_determinism_and_seed_sensitivity():
    cfg = synth.SynthConfig(seed=5, samples_per_class=800)
    a = synth.generate_recording(ClassLabel.S2, cfg)
    b = synth.generate_recording("S2", cfg)
    assert a == b
    c = synth.generate_recording(ClassLabel.S2, synth.SynthConfig(seed=6, samples_per_class=800))
    assert not np.array_equal(a.samples, c.samples)


def test_class_streams_independent_of_class_list():
    full = synth.generate_dataset(synth.SynthConfig(seed=1, samples_per_class=64))
    part = synth.generate_dataset(synth.SynthConfig(seed=1, samples_per_class=64, classes=(4, 2)))
    assert part[0] == full[4]
    assert part[1] == full[2]


def test_noise_free_equal_seeds_identical():
    cfg = synth.SynthConfig(noise_sigma=0.0, samples_per_class=320)
    assert synth.generate_recording(3, cfg) == synth.generate_recording(3, cfg)


@pytest.mark.parametrize("code", list(range(7)))
def test_noise_free_exactly_periodic(code):
    cfg = synth.SynthConfig(noise_sigma=0.0, samples_per_class=1600)
    x = synth.generate_recording(code, cfg).samples
    period = int(cfg.sample_rate_hz / cfg.fundamental_hz)
    assert np.array_equal(x[:, period:], x[:, :-period])


def test_channels_are_distinct_waveforms():
    w = synth.base_waveforms(np.arange(160) / 160)
    for i in range(4):
        for j in range(i + 1, 4):
            assert not np.allclose(w[i], w[j])


def test_classes_differ_in_channel_means():
    cfg = synth.SynthConfig(noise_sigma=0.0, samples_per_class=1600)
    means = np.array([r.samples.mean(axis=1) for r in synth.generate_dataset(cfg)])
    for i in range(7):
        for j in range(i + 1, 7):
            assert np.max(np.abs(means[i] - means[j])) > 0.1


def test_class_means_separated_after_normalization():
    # class means of the normalized compressed points sit at least 4 sigma apart
    cfg = synth.SynthConfig()
    pts = points_from_recordings(synth.generate_dataset(cfg))
    z = preprocess.apply(preprocess.fit(pts), pts.X)
    means = np.array([z[pts.y == c].mean(axis=0) for c in range(7)])
    d = np.linalg.norm(means[:, None] - means[None], axis=2)
    assert d[np.triu_indices(7, 1)].min() >= 4 * cfg.noise_sigma


@pytest.mark.parametrize("kwargs", [
    dict(samples_per_class=100),
    dict(samples_per_class=0),
    dict(noise_sigma=-0.1),
    dict(separation=0.0),
    dict(separation=-1.0),
    dict(classes=()),
    dict(classes=(1, 1)),
    dict(classes=(9,)),
    dict(fundamental_hz=9000.0),
    dict(seed=-1),
])
def test_invalid_config_rejected(kwargs):
    with pytest.raises(ValueError):
        synth.SynthConfig(**kwargs)


def test_zero_separation_rejected_even_without_noise():
    with pytest.raises(ValueError, match="separation"):
        synth.SynthConfig(noise_sigma=0.0, separation=0.0)


def test_transition_switches_labels():
    cfg = synth.SynthConfig(samples_per_class=64)
    rec = synth.generate_transition("Normal", "S1", 100, 320, cfg)
    assert np.all(rec.labels[:100] == 0) and np.all(rec.labels[100:] == 1)
    after = synth.generate_recording(1, cfg, 320)
    assert np.array_equal(rec.samples[:, 100:], after.samples[:, 100:])
    with pytest.raises(ValueError):
        synth.generate_transition(0, 1, 400, 320, cfg)
