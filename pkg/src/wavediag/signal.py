"""Recordings, class labels, windowing and the plain CSV format shared by the pipeline."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import ParseError


class ClassLabel(enum.IntEnum):
    Normal = 0
    S1 = 1
    S2 = 2
    S3 = 3
    S4 = 4
    S1S2 = 5
    S2S4 = 6

    @classmethod
    def parse(cls, value: str | int) -> "ClassLabel":
        """Accept a code (``3``, ``"3"``) or a name (``"S3"``)."""
        if isinstance(value, str):
            value = value.strip()
            if value in cls.__members__:
                return cls[value]
            try:
                value = int(value)
            except ValueError:
                raise ValueError(f"unknown class label {value!r}") from None
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"unknown class code {value!r}") from None


CLASS_COUNT = len(ClassLabel)


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Recording:
    """Equal-length named channels sampled at ``sample_rate_hz``.

    ``samples`` has shape ``(n_channels, n_samples)``. ``labels`` is either
    ``None`` or one class code per sample.
    """

    channel_names: tuple[str, ...]
    sample_rate_hz: float
    samples: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        names = tuple(str(n) for n in self.channel_names)
        samples = _frozen(self.samples)
        if samples.ndim == 1:
            samples = _frozen(samples[None, :])
        if samples.ndim != 2:
            raise ValueError("samples must be 2-D (channels x samples)")
        if len(names) != samples.shape[0]:
            raise ValueError(f"{len(names)} channel names for {samples.shape[0]} channels")
        if len(set(names)) != len(names):
            raise ValueError(f"channel names must be unique, got {names}")
        if samples.shape[1] < 1:
            raise ValueError("a recording needs at least one sample")
        if not (self.sample_rate_hz > 0 and math.isfinite(self.sample_rate_hz)):
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        labels = self.labels
        if labels is not None:
            labels = _frozen(labels, dtype=np.int64)
            if labels.shape != (samples.shape[1],):
                raise ValueError(f"{labels.size} labels for {samples.shape[1]} samples")
            if labels.size and (labels.min() < 0 or labels.max() >= CLASS_COUNT):
                raise ValueError("label codes must lie in 0..6")
        object.__setattr__(self, "channel_names", names)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.samples.shape[1]

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    def channel(self, name: str) -> np.ndarray:
        try:
            return self.samples[self.channel_names.index(name)]
        except ValueError:
            raise KeyError(f"no channel named {name!r}; have {list(self.channel_names)}") from None

    def select(self, names: Sequence[str]) -> "Recording":
        """Sub-recording with channels in the requested order."""
        rows = [self.channel(n) for n in names]
        return Recording(tuple(names), self.sample_rate_hz, np.stack(rows), self.labels)

    def slice(self, start: int, stop: int) -> "Recording":
        labels = None if self.labels is None else self.labels[start:stop]
        return Recording(self.channel_names, self.sample_rate_hz, self.samples[:, start:stop], labels)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Recording):
            return NotImplemented
        if (self.labels is None) != (other.labels is None):
            return False
        return (
            self.channel_names == other.channel_names
            and self.sample_rate_hz == other.sample_rate_hz
            and np.array_equal(self.samples, other.samples)
            and (self.labels is None or np.array_equal(self.labels, other.labels))
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class LabeledPointSet:
    """Feature vectors (rows of ``X``) with integer class codes ``y``."""

    feature_names: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray = field(default=None)

    def __post_init__(self):
        X = _frozen(self.X)
        if X.ndim != 2:
            raise ValueError("X must be 2-D (points x features)")
        names = tuple(self.feature_names)
        if X.shape[1] != len(names):
            raise ValueError(f"vectors have {X.shape[1]} entries for {len(names)} feature names")
        y = np.zeros(X.shape[0], dtype=np.int64) if self.y is None else self.y
        y = _frozen(y, dtype=np.int64)
        if y.shape != (X.shape[0],):
            raise ValueError(f"{y.size} labels for {X.shape[0]} points")
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.X.shape[0]

    def subset(self, index) -> "LabeledPointSet":
        return LabeledPointSet(self.feature_names, self.X[index], self.y[index])

    @staticmethod
    def concat(sets: Sequence["LabeledPointSet"]) -> "LabeledPointSet":
        if not sets:
            raise ValueError("nothing to concatenate")
        names = sets[0].feature_names
        for s in sets[1:]:
            if s.feature_names != names:
                raise ValueError(f"feature names differ: {names} vs {s.feature_names}")
        return LabeledPointSet(names, np.concatenate([s.X for s in sets]), np.concatenate([s.y for s in sets]))


def window_iter(rec: Recording, window_len: int) -> Iterator[Recording]:
    """Consecutive non-overlapping windows; a trailing partial window is dropped."""
    if int(window_len) != window_len or window_len < 1:
        raise ValueError(f"window_len must be a positive integer, got {window_len!r}")
    window_len = int(window_len)
    for start in range(0, len(rec) - window_len + 1, window_len):
        yield rec.slice(start, start + window_len)


# --- CSV -----------------------------------------------------------------

def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _rate_from_step(dt: float) -> float:
    # 1/dt is not exact for non-dyadic rates; 12 digits recover the written rate
    return float(f"{1.0 / dt:.12g}")


def save_recording_csv(rec: Recording, path) -> None:
    """Write ``t,<names>[,label]`` rows, reals at 17 significant digits."""
    header = ["t", *rec.channel_names]
    if rec.labels is not None:
        header.append("label")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in _csv_rows(rec):
            fh.write(row + "\n")


def _csv_rows(rec: Recording) -> Iterator[str]:
    dt = 1.0 / rec.sample_rate_hz
    cols = rec.samples.T
    for k in range(len(rec)):
        cells = [_fmt(k * dt), *(_fmt(v) for v in cols[k])]
        if rec.labels is not None:
            cells.append(str(int(rec.labels[k])))
        yield ",".join(cells)


class _CsvReader:
    """Incremental reader for the recording CSV format."""

    def __init__(self, path):
        self.path = Path(path)
        self._fh = open(self.path, newline="", encoding="utf-8")
        self._reader = csv.reader(self._fh)
        try:
            header = next(self._reader)
        except StopIteration:
            self.close()
            raise ParseError(f"{self.path}: empty file, expected a header row") from None
        header = [h.strip() for h in header]
        if len(header) < 2 or header[0] != "t":
            self.close()
            raise ParseError(f"{self.path}: row 1: header must start with 't' and name at least one channel")
        self.has_labels = header[-1] == "label"
        self.channel_names = tuple(header[1:-1] if self.has_labels else header[1:])
        if not self.channel_names or any(not n for n in self.channel_names):
            self.close()
            raise ParseError(f"{self.path}: row 1: empty channel name in header")
        if len(set(self.channel_names)) != len(self.channel_names) or "t" in self.channel_names:
            self.close()
            raise ParseError(f"{self.path}: row 1: duplicate channel names")
        self.width = len(header)
        self.row_number = 1

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def rows(self) -> Iterator[tuple[float, list[float], int | None]]:
        for cells in self._reader:
            self.row_number += 1
            if not cells or (len(cells) == 1 and not cells[0].strip()):
                continue
            if len(cells) != self.width:
                raise ParseError(
                    f"{self.path}: row {self.row_number}: expected {self.width} cells, got {len(cells)}"
                )
            try:
                values = [float(c) for c in (cells[:-1] if self.has_labels else cells)]
            except ValueError:
                raise ParseError(f"{self.path}: row {self.row_number}: non-numeric cell") from None
            label = None
            if self.has_labels:
                raw = cells[-1].strip()
                try:
                    label = int(ClassLabel(int(raw)))
                except ValueError:
                    raise ParseError(f"{self.path}: row {self.row_number}: unknown label code {raw!r}") from None
            yield values[0], values[1:], label


def load_recording_csv(path) -> Recording:
    with _CsvReader(path) as reader:
        ts, data, labels = [], [], []
        for t, vals, label in reader.rows():
            ts.append(t)
            data.append(vals)
            labels.append(label)
        if len(ts) < 2:
            raise ParseError(f"{path}: need at least two data rows to infer the sample rate")
        dt = ts[1] - ts[0]
        if not dt > 0:
            raise ParseError(f"{path}: row 3: time column must increase")
        return Recording(
            reader.channel_names,
            _rate_from_step(dt),
            np.asarray(data, dtype=float).T,
            np.asarray(labels, dtype=np.int64) if reader.has_labels else None,
        )


def iter_csv_windows(path, window_len: int) -> Iterator[Recording]:
    """Stream windows from a recording CSV holding only one window in memory."""
    if int(window_len) != window_len or window_len < 1:
        raise ValueError(f"window_len must be a positive integer, got {window_len!r}")
    with _CsvReader(path) as reader:
        rate = None
        first_t = None
        buf, lab = [], []
        for t, vals, label in reader.rows():
            if first_t is None:
                first_t = t
            elif rate is None:
                if not t > first_t:
                    raise ParseError(f"{path}: row 3: time column must increase")
                rate = _rate_from_step(t - first_t)
            buf.append(vals)
            lab.append(label)
            if len(buf) == window_len:
                if rate is None:
                    raise ParseError(f"{path}: need at least two data rows to infer the sample rate")
                yield Recording(
                    reader.channel_names, rate, np.asarray(buf, dtype=float).T,
                    np.asarray(lab, dtype=np.int64) if reader.has_labels else None,
                )
                buf, lab = [], []


def csv_header(path) -> tuple[tuple[str, ...], bool]:
    """Channel names and whether a label column is present."""
    with _CsvReader(path) as reader:
        return reader.channel_names, reader.has_labels
