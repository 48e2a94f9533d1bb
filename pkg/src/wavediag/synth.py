"""Seeded class-conditional 4-channel recordings.

A statistical stand-in for converter measurements, not a circuit
simulation. Each channel is a fixed periodic waveform at ``fundamental_hz``;
the class sets an amplitude scale, a DC offset (in units of ``separation``)
and a second-harmonic fraction, all taken from :data:`CLASS_TABLE`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .signal import ClassLabel, Recording

CHANNELS = ("I_11", "I_hau", "I_12", "I_RL")

BASE_AMPLITUDE = 0.25
# how strongly each channel follows the class DC offset
CHANNEL_GAIN = np.array([1.0, -0.7, 0.85, 1.15])

# code: (amplitude scale, DC offset in separation units, second-harmonic fraction).
# Offsets are deliberately out of code order so the code is not a linear
# function of the inputs.
CLASS_TABLE: dict[int, tuple[float, float, float]] = {
    ClassLabel.Normal: (1.00, 0.0, 0.00),
    ClassLabel.S1: (1.10, 2.0, 0.10),
    ClassLabel.S2: (1.05, 4.0, 0.20),
    ClassLabel.S3: (1.15, 6.0, 0.05),
    ClassLabel.S4: (1.20, 1.0, 0.15),
    ClassLabel.S1S2: (1.25, 3.0, 0.25),
    ClassLabel.S2S4: (1.30, 5.0, 0.30),
}


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    samples_per_class: int = 32_768
    classes: tuple[int, ...] = tuple(int(c) for c in ClassLabel)
    noise_sigma: float = 0.05
    separation: float = 1.0
    sample_rate_hz: float = 16_000.0
    fundamental_hz: float = 100.0
    channel_names: tuple[str, ...] = field(default=CHANNELS)

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(int(ClassLabel.parse(c)) for c in self.classes))
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.samples_per_class < 8 or self.samples_per_class % 8:
            raise ValueError(f"samples_per_class must be a positive multiple of 8, got {self.samples_per_class}")
        if not self.classes or len(set(self.classes)) != len(self.classes):
            raise ValueError("classes must be a non-empty list of distinct codes")
        if not self.noise_sigma >= 0:
            raise ValueError("noise_sigma must be >= 0")
        if not self.separation > 0:
            raise ValueError("separation must be > 0")
        if not (self.sample_rate_hz > 0 and self.fundamental_hz > 0):
            raise ValueError("sample_rate_hz and fundamental_hz must be positive")
        if self.fundamental_hz >= self.sample_rate_hz / 2:
            raise ValueError("fundamental_hz must be below the Nyquist rate")
        if len(self.channel_names) != len(CHANNELS):
            raise ValueError(f"exactly {len(CHANNELS)} channel names are required")


def _cycle_fraction(n: int, cfg: SynthConfig, harmonic: int = 1) -> np.ndarray:
    # fmod on integer multiples keeps the waveform exactly periodic
    k = np.arange(n, dtype=float)
    return np.fmod(k * (cfg.fundamental_hz * harmonic), cfg.sample_rate_hz) / cfg.sample_rate_hz


def base_waveforms(frac: np.ndarray) -> np.ndarray:
    """Sine, triangle, clipped sine and sawtooth at cycle fraction ``frac``."""
    phase = 2 * np.pi * frac
    s = np.sin(phase)
    triangle = 2 / np.pi * np.arcsin(s)
    clipped = np.clip(1.5 * s, -1.0, 1.0)
    saw = 2 * frac - 1
    return np.stack([s, triangle, clipped, saw])


def clean_signal(code: int, n: int, cfg: SynthConfig) -> np.ndarray:
    amp, offset, harmonic = CLASS_TABLE[int(code)]
    fund = base_waveforms(_cycle_fraction(n, cfg))
    second = base_waveforms(_cycle_fraction(n, cfg, harmonic=2))
    wave = BASE_AMPLITUDE * amp * (fund + harmonic * second)
    return wave + (cfg.separation * offset * CHANNEL_GAIN)[:, None]


def generate_recording(label, cfg: SynthConfig, n_samples: int | None = None) -> Recording:
    code = int(ClassLabel.parse(label))
    n = cfg.samples_per_class if n_samples is None else int(n_samples)
    x = clean_signal(code, n, cfg)
    if cfg.noise_sigma > 0:
        rng = np.random.default_rng([cfg.seed, code])
        x = x + rng.normal(0.0, cfg.noise_sigma, size=x.shape)
    return Recording(cfg.channel_names, cfg.sample_rate_hz, x, np.full(n, code))


def generate_dataset(cfg: SynthConfig) -> list[Recording]:
    return [generate_recording(c, cfg) for c in cfg.classes]


def generate_transition(before, after, switch_at: int, n_samples: int, cfg: SynthConfig) -> Recording:
    """``before`` up to sample ``switch_at``, ``after`` from there on, phase-continuous."""
    if not 0 <= switch_at <= n_samples:
        raise ValueError("switch_at must lie within the recording")
    a = generate_recording(before, cfg, n_samples)
    b = generate_recording(after, cfg, n_samples)
    x = np.concatenate([a.samples[:, :switch_at], b.samples[:, switch_at:]], axis=1)
    y = np.concatenate([a.labels[:switch_at], b.labels[switch_at:]])
    return Recording(cfg.channel_names, cfg.sample_rate_hz, x, y)
