"""Turning raw network outputs into class decisions, window verdicts and metrics."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .signal import ClassLabel

UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Decision:
    """``code`` is None when the raw output fell outside the rounding window."""

    code: int | None
    raw: float

    @property
    def is_unknown(self) -> bool:
        return self.code is None

    @property
    def name(self) -> str:
        return UNKNOWN if self.code is None else ClassLabel(self.code).name


def _round_half_away(f: float) -> int:
    return int(math.copysign(math.floor(abs(f) + 0.5), f))


def round_decision(f: float, class_count: int = len(ClassLabel)) -> Decision:
    """Nearest class code when -0.5 < f < class_count - 0.5, else Unknown."""
    if class_count < 1:
        raise ValueError("class_count must be at least 1")
    f = float(f)
    if not math.isfinite(f):
        raise ValueError(f"network output must be finite, got {f!r}")
    if -0.5 < f < class_count - 0.5:
        return Decision(_round_half_away(f), f)
    return Decision(None, f)


def round_decisions(raw: np.ndarray, class_count: int = len(ClassLabel)) -> np.ndarray:
    """Vectorised :func:`round_decision`; Unknown is encoded as -1."""
    raw = np.asarray(raw, dtype=float)
    if not np.all(np.isfinite(raw)):
        raise ValueError("network outputs must be finite")
    codes = (np.sign(raw) * np.floor(np.abs(raw) + 0.5)).astype(np.int64)
    inside = (raw > -0.5) & (raw < class_count - 0.5)
    return np.where(inside, codes, -1)


class VerdictRule(enum.Enum):
    TrailingRun = "TrailingRun"
    Majority = "Majority"


@dataclass
class Verdict:
    final: int
    counts: dict[str, int]
    rule: VerdictRule
    window: list[Decision] = field(default_factory=list)

    @property
    def final_name(self) -> str:
        return ClassLabel(self.final).name

    def to_json_obj(self, window_index: int) -> dict:
        return {
            "window_index": window_index,
            "final": self.final_name,
            "rule": self.rule.value,
            "counts": self.counts,
            "decisions": [d.name for d in self.window],
        }


def window_verdict(decisions: Sequence[Decision], run_min: int = 3,
                   class_count: int = len(ClassLabel)) -> Verdict:
    """Joint verdict over one window of per-point decisions.

    A fault that persists at the end of the window for at least ``run_min``
    decisions wins even when it is a minority; otherwise the most frequent
    decided class wins (lower code on ties). A window with no decided points
    reports Normal.
    """
    decisions = list(decisions)
    if not decisions:
        raise ValueError("cannot judge an empty window")
    if run_min < 1:
        raise ValueError("run_min must be at least 1")

    counts = {ClassLabel(c).name: 0 for c in range(class_count)}
    counts[UNKNOWN] = 0
    for d in decisions:
        counts[d.name] += 1

    last = decisions[-1].code
    if last is not None and last != ClassLabel.Normal:
        run = 0
        for d in reversed(decisions):
            if d.code != last:
                break
            run += 1
        if run >= run_min:
            return Verdict(last, counts, VerdictRule.TrailingRun, decisions)

    decided = [d.code for d in decisions if d.code is not None]
    if not decided:
        return Verdict(int(ClassLabel.Normal), counts, VerdictRule.Majority, decisions)
    tally = np.bincount(decided, minlength=class_count)
    return Verdict(int(np.argmax(tally)), counts, VerdictRule.Majority, decisions)


@dataclass
class MetricsReport:
    confusion: np.ndarray  # rows: truth, columns: prediction
    precision: np.ndarray
    recall: np.ndarray
    accuracy: float
    unknown: np.ndarray  # per truth class, predictions outside the rounding window

    @property
    def total(self) -> int:
        return int(self.confusion.sum() + self.unknown.sum())

    def to_text(self, title: str = "") -> str:
        k = self.confusion.shape[0]
        names = [ClassLabel(c).name if c < len(ClassLabel) else str(c) for c in range(k)]
        lines = [title] if title else []
        lines.append(f"accuracy: {self.accuracy:.4f} ({int(np.trace(self.confusion))}/{self.total})")
        lines.append(f"{'class':<8}{'precision':>10}{'recall':>10}{'support':>9}{'unknown':>9}")
        for c in range(k):
            support = int(self.confusion[c].sum() + self.unknown[c])
            lines.append(f"{names[c]:<8}{self.precision[c]:>10.4f}{self.recall[c]:>10.4f}"
                         f"{support:>9}{int(self.unknown[c]):>9}")
        lines.append("confusion (rows truth, columns predicted):")
        for c in range(k):
            lines.append(f"{names[c]:<8}" + "".join(f"{v:>7d}" for v in self.confusion[c]))
        return "\n".join(lines) + "\n"


def metrics(pred, truth, class_count: int = len(ClassLabel)) -> MetricsReport:
    """Confusion matrix with per-class precision/recall.

    Predictions of -1 (Unknown) count as misses: they are tallied in
    ``unknown`` for their truth class and never enter a column.
    """
    pred = np.asarray(pred, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise ValueError(f"pred and truth lengths differ: {pred.shape} vs {truth.shape}")
    if pred.size == 0:
        raise ValueError("need at least one prediction")
    if truth.min() < 0 or truth.max() >= class_count or pred.max() >= class_count or pred.min() < -1:
        raise ValueError(f"codes must lie in 0..{class_count - 1}")
    known = pred >= 0
    conf = np.zeros((class_count, class_count), dtype=np.int64)
    np.add.at(conf, (truth[known], pred[known]), 1)
    row_tot = np.bincount(truth, minlength=class_count)
    col_tot = conf.sum(axis=0)
    diag = np.diag(conf)
    precision = np.divide(diag, col_tot, out=np.zeros(class_count), where=col_tot > 0)
    recall = np.divide(diag, row_tot, out=np.zeros(class_count), where=row_tot > 0)
    unknown = np.bincount(truth[~known], minlength=class_count)
    return MetricsReport(conf, precision, recall, float(diag.sum() / truth.size), unknown)
