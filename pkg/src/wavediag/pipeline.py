"""End-to-end glue: recordings -> compressed points -> model -> metrics and verdicts."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import dfn, knn, preprocess
from .diagnose import MetricsReport, Verdict, metrics, round_decision, round_decisions, window_verdict
from .dfn import MLPConfig, MLPModel, TrainReport
from .signal import CLASS_COUNT, LabeledPointSet, Recording
from .wavelet import compress


def block_labels(labels: np.ndarray, block: int) -> np.ndarray:
    """Most frequent code in each block of ``block`` samples (lower code on ties)."""
    blocks = np.asarray(labels).reshape(-1, block)
    out = np.empty(blocks.shape[0], dtype=np.int64)
    for i, row in enumerate(blocks):
        out[i] = np.argmax(np.bincount(row))
    return out


def compress_recording(rec: Recording, levels: int = 3) -> Recording:
    """Per-channel approximation at ``levels``; sample rate drops by 2**levels."""
    block = 1 << levels
    data = compress(rec.samples, levels)
    labels = None if rec.labels is None else block_labels(rec.labels, block)
    return Recording(rec.channel_names, rec.sample_rate_hz / block, data, labels)


def points_from_recording(rec: Recording, features: Sequence[str] | None = None,
                          levels: int = 3) -> LabeledPointSet:
    """One point per compressed time step, with the selected channels as features."""
    if rec.labels is None:
        raise ValueError("recording is unlabeled")
    if features is not None:
        rec = rec.select(features)
    c = compress_recording(rec, levels)
    return LabeledPointSet(c.channel_names, c.samples.T, c.labels)


def points_from_recordings(recs: Iterable[Recording], features: Sequence[str] | None = None,
                           levels: int = 3) -> LabeledPointSet:
    return LabeledPointSet.concat([points_from_recording(r, features, levels) for r in recs])


def train_count(n: int, fraction: float) -> int:
    """Training share of a class with ``n`` points: floor(n * fraction), at least 1."""
    return max(1, int(np.floor(n * fraction)))


def stratified_split(points: LabeledPointSet, train_fraction: float = 0.3,
                     seed: int = 0) -> tuple[LabeledPointSet, LabeledPointSet]:
    """Per class, a seeded random ``train_fraction`` goes to training, the rest to test."""
    if not 0 < train_fraction < 1:
        raise ValueError(f"split must lie in (0, 1), got {train_fraction}")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for c in np.unique(points.y):
        idx = np.flatnonzero(points.y == c)
        idx = idx[rng.permutation(idx.size)]
        m = train_count(idx.size, train_fraction)
        train_idx.append(np.sort(idx[:m]))
        test_idx.append(np.sort(idx[m:]))
    return points.subset(np.concatenate(train_idx)), points.subset(np.concatenate(test_idx))


def dfn_predictions(model: MLPModel, points: LabeledPointSet) -> np.ndarray:
    """Class codes (-1 for Unknown) for every point."""
    _check_features(model, points.feature_names)
    return round_decisions(dfn.predict(model, points.X), model.class_count)


def evaluate_dfn(model: MLPModel, points: LabeledPointSet) -> MetricsReport:
    return metrics(dfn_predictions(model, points), points.y, model.class_count)


def fit_knn(train: LabeledPointSet, stats: preprocess.NormalizerStats, k: int = 5) -> knn.KnnModel:
    """KNN on the same normalized coordinates the network sees."""
    scaled = LabeledPointSet(train.feature_names, preprocess.apply(stats, train.X), train.y)
    return knn.knn_fit(scaled, k)


def evaluate_knn(model: knn.KnnModel, stats: preprocess.NormalizerStats, points: LabeledPointSet,
                 class_count: int = CLASS_COUNT) -> MetricsReport:
    pred = knn.knn_predict_batch(model, preprocess.apply(stats, points.X))
    return metrics(pred, points.y, class_count)


@dataclass
class TrainResult:
    model: MLPModel
    report: TrainReport
    train: LabeledPointSet
    test: LabeledPointSet
    test_metrics: MetricsReport
    elapsed_s: float = 0.0  # wall time of the whole run


def run_training(recs: Sequence[Recording], features: Sequence[str] | None = None, levels: int = 3,
                 split: float = 0.3, split_seed: int = 0, config: MLPConfig | None = None,
                 class_count: int = CLASS_COUNT) -> TrainResult:
    """Compress, split per class, fit the normalizer and network on the training share."""
    start = time.perf_counter()
    points = points_from_recordings(recs, features, levels)
    train, test = stratified_split(points, split, split_seed)
    if config is None:
        config = MLPConfig(layer_sizes=(train.X.shape[1],) + dfn.DEFAULT_LAYERS[1:])
    model, report = dfn.train(config, train, class_count)
    test_metrics = evaluate_dfn(model, test)
    return TrainResult(model, report, train, test, test_metrics, time.perf_counter() - start)


def _check_features(model: MLPModel, names: Sequence[str]) -> None:
    if tuple(names) != model.feature_names:
        raise ValueError(f"features {list(names)} do not match the model's {list(model.feature_names)}")


def stream_verdicts(model: MLPModel, windows: Iterable[Recording], levels: int = 3,
                    run_min: int = 3) -> Iterator[Verdict]:
    """One verdict per raw window: compress, predict every point, round, judge."""
    for win in windows:
        missing = [n for n in model.feature_names if n not in win.channel_names]
        if missing:
            raise ValueError(f"recording lacks model features {missing}")
        comp = compress(win.select(model.feature_names).samples, levels)
        raw = dfn.predict(model, comp.T)
        decisions = [round_decision(f, model.class_count) for f in raw]
        yield window_verdict(decisions, run_min, model.class_count)
