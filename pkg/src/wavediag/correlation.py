"""Pearson correlation between channels and greedy redundancy removal.

Features whose absolute correlation reaches ``redundancy_threshold`` (0.5 by
default, i.e. the *significant* and *high* degrees) are treated as carrying the
same information; one of each redundant group is kept.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateInputError
from .signal import Recording

ROUNDOFF = 1e-12


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1:
        raise ValueError("covariance takes two 1-D sequences")
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise ValueError("need at least two samples")
    return x, y


def covariance(x, y) -> float:
    """Sample covariance with divisor m - 1."""
    x, y = _pair(x, y)
    return float(np.dot(x - x.mean(), y - y.mean()) / (x.size - 1))


def pearson(x, y) -> float:
    x, y = _pair(x, y)
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise DegenerateInputError("pearson is undefined for a constant sequence")
    sx = np.sqrt(covariance(x, x))
    sy = np.sqrt(covariance(y, y))
    r = covariance(x, y) / (sx * sy)
    return _clamp(r)


def _clamp(r: float) -> float:
    if abs(r) > 1.0 + ROUNDOFF:
        raise ArithmeticError(f"correlation {r!r} outside [-1, 1] beyond round-off")
    return float(min(1.0, max(-1.0, r)))


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    names: tuple[str, ...]
    r: np.ndarray

    def __post_init__(self):
        r = np.array(self.r, dtype=float)
        names = tuple(self.names)
        n = len(names)
        if r.shape != (n, n):
            raise ValueError(f"matrix shape {r.shape} does not match {n} names")
        if not np.array_equal(r, r.T):
            raise ValueError("correlation matrix must be symmetric")
        if np.any(np.abs(r) > 1.0 + ROUNDOFF):
            raise ValueError("correlation entries must lie in [-1, 1]")
        r.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "r", r)

    def __getitem__(self, key: tuple[str, str]) -> float:
        a, b = key
        return float(self.r[self.names.index(a), self.names.index(b)])

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("," + ",".join(self.names) + "\n")
        for name, row in zip(self.names, self.r):
            out.write(name + "," + ",".join(f"{v:.17g}" for v in row) + "\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CorrelationMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        names = lines[0].split(",")[1:]
        rows = [[float(v) for v in ln.split(",")[1:]] for ln in lines[1:]]
        return cls(tuple(names), np.array(rows))


def correlation_matrix(rec: Recording) -> CorrelationMatrix:
    if rec.n_channels < 2:
        raise ValueError("need at least two channels")
    if len(rec) < 2:
        raise ValueError("need at least two samples per channel")
    data = rec.samples
    for name, ch in zip(rec.channel_names, data):
        if np.ptp(ch) == 0:
            raise DegenerateInputError(f"channel {name!r} is constant")
    centered = data - data.mean(axis=1, keepdims=True)
    cov = centered @ centered.T / (len(rec) - 1)
    sd = np.sqrt(np.diag(cov))
    r = cov / np.outer(sd, sd)
    if np.any(np.abs(r) > 1.0 + ROUNDOFF):
        raise ArithmeticError("correlation outside [-1, 1] beyond round-off")
    r = np.clip(r, -1.0, 1.0)
    r = (r + r.T) / 2
    np.fill_diagonal(r, 1.0)
    return CorrelationMatrix(rec.channel_names, r)


class CorrelationDegree(enum.Enum):
    Weak = "weak"
    Moderate = "moderate"
    Significant = "significant"
    High = "high"


def degree(r: float) -> CorrelationDegree:
    a = abs(r)
    if not a <= 1.0:
        raise ValueError(f"|r| must not exceed 1, got {r!r}")
    if a < 0.3:
        return CorrelationDegree.Weak
    if a < 0.5:
        return CorrelationDegree.Moderate
    if a < 0.8:
        return CorrelationDegree.Significant
    return CorrelationDegree.High


@dataclass
class SelectionReport:
    kept: list[str]
    removed: dict[str, str] = field(default_factory=dict)
    fine_tuned_in: list[str] = field(default_factory=list)

    @property
    def selected(self) -> list[str]:
        """Greedy survivors followed by the re-added features."""
        return self.kept + self.fine_tuned_in

    def to_text(self) -> str:
        lines = ["kept: " + " ".join(self.kept)]
        for name, by in self.removed.items():
            lines.append(f"removed: {name} by {by}")
        lines.append("fine_tuned_in: " + " ".join(self.fine_tuned_in))
        lines.append("selected: " + " ".join(self.selected))
        return "\n".join(lines) + "\n"


def select_features(cm: CorrelationMatrix, redundancy_threshold: float = 0.5,
                    fine_tune_count: int = 1) -> SelectionReport:
    """Greedy redundancy removal followed by ``fine_tune_count`` re-additions.

    Features are visited in order of how many redundant partners they have
    (most first, index order on ties). A visited feature that has not been
    removed is kept and removes its redundant partners. Fine-tuning then
    re-adds, one at a time, the removed feature least correlated with the
    current selection (smallest maximum |r|).
    """
    if not 0 < redundancy_threshold <= 1:
        raise ValueError(f"redundancy_threshold must lie in (0, 1], got {redundancy_threshold}")
    if fine_tune_count < 0:
        raise ValueError("fine_tune_count must be non-negative")
    a = np.abs(cm.r)
    n = len(cm.names)
    redundant = (a >= redundancy_threshold) & ~np.eye(n, dtype=bool)
    partners = redundant.sum(axis=1)
    order = sorted(range(n), key=lambda i: (-partners[i], i))

    kept: list[int] = []
    removed: dict[int, int] = {}
    for i in order:
        if i in removed:
            continue
        kept.append(i)
        for j in np.flatnonzero(redundant[i]):
            j = int(j)
            if j not in kept and j not in removed:
                removed[j] = i

    fine: list[int] = []
    for _ in range(fine_tune_count):
        candidates = sorted(removed)
        if not candidates:
            break
        current = kept + fine
        best = min(candidates, key=lambda j: (a[j, current].max(), j))
        fine.append(best)
        del removed[best]

    names = cm.names
    return SelectionReport(
        kept=[names[i] for i in kept],
        removed={names[j]: names[by] for j, by in sorted(removed.items())},
        fine_tuned_in=[names[i] for i in fine],
    )


def correlation_matrix_from_columns(names: Sequence[str], columns) -> CorrelationMatrix:
    """Convenience wrapper for data that is not wrapped in a Recording."""
    return correlation_matrix(Recording(tuple(names), 1.0, np.asarray(columns, dtype=float)))
