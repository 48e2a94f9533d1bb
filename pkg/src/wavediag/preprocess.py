"""Min-max normalization fitted on training features and reused at inference."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError
from .signal import LabeledPointSet


@dataclass(frozen=True, eq=False)
class NormalizerStats:
    feature_names: tuple[str, ...]
    x_min: np.ndarray
    x_max: np.ndarray
    target_lo: float = -1.0
    target_hi: float = 1.0

    def __post_init__(self):
        lo = np.array(self.x_min, dtype=float).reshape(-1)
        hi = np.array(self.x_max, dtype=float).reshape(-1)
        names = tuple(self.feature_names)
        if lo.shape != (len(names),) or hi.shape != (len(names),):
            raise ValueError("x_min/x_max must have one entry per feature")
        if np.any(lo > hi):
            raise ValueError("x_min must not exceed x_max")
        if not self.target_lo < self.target_hi:
            raise ValueError("target_lo must be below target_hi")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "x_min", lo)
        object.__setattr__(self, "x_max", hi)
        object.__setattr__(self, "target_lo", float(self.target_lo))
        object.__setattr__(self, "target_hi", float(self.target_hi))

    @property
    def degenerate_flags(self) -> np.ndarray:
        return self.x_min == self.x_max

    def __eq__(self, other):
        if not isinstance(other, NormalizerStats):
            return NotImplemented
        return (self.feature_names == other.feature_names
                and np.array_equal(self.x_min, other.x_min)
                and np.array_equal(self.x_max, other.x_max)
                and self.target_lo == other.target_lo and self.target_hi == other.target_hi)

    __hash__ = None

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("feature,x_min,x_max,degenerate,target_lo,target_hi\n")
        for name, lo, hi, deg in zip(self.feature_names, self.x_min, self.x_max, self.degenerate_flags):
            out.write(f"{name},{lo:.17g},{hi:.17g},{int(deg)},{self.target_lo:.17g},{self.target_hi:.17g}\n")
        return out.getvalue()


def fit(points: LabeledPointSet, target_lo: float = -1.0, target_hi: float = 1.0) -> NormalizerStats:
    if len(points) == 0:
        raise ValueError("cannot fit a normalizer on an empty point set")
    return NormalizerStats(points.feature_names, points.X.min(axis=0), points.X.max(axis=0),
                           target_lo, target_hi)


def _check(stats: NormalizerStats, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[-1:] != (len(stats.feature_names),):
        raise ValueError(f"expected {len(stats.feature_names)} features, got shape {v.shape}")
    return v


def apply(stats: NormalizerStats, v) -> np.ndarray:
    """Affine map of [x_min, x_max] onto [target_lo, target_hi]; no clamping.

    Accepts one vector or a 2-D batch of row vectors. Flat features map to
    the middle of the target range.
    """
    v = _check(stats, v)
    span = stats.x_max - stats.x_min
    deg = span == 0
    # dividing first makes x_max land exactly on target_hi
    frac = (v - stats.x_min) / np.where(deg, 1.0, span)
    out = stats.target_lo + frac * (stats.target_hi - stats.target_lo)
    return np.where(deg, (stats.target_lo + stats.target_hi) / 2, out)


def invert(stats: NormalizerStats, v) -> np.ndarray:
    v = _check(stats, v)
    deg = stats.degenerate_flags
    if deg.any():
        bad = [n for n, d in zip(stats.feature_names, deg) if d]
        raise DegenerateInputError(f"cannot invert flat features {bad}")
    span = stats.x_max - stats.x_min
    return stats.x_min + (v - stats.target_lo) / (stats.target_hi - stats.target_lo) * span
