"""k-nearest-neighbour baseline on normalized feature vectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signal import LabeledPointSet


@dataclass(frozen=True, eq=False)
class KnnModel:
    k: int
    points: LabeledPointSet

    def __post_init__(self):
        if not 1 <= self.k <= len(self.points):
            raise ValueError(f"k must lie in 1..{len(self.points)}, got {self.k}")


def knn_fit(points: LabeledPointSet, k: int = 5) -> KnnModel:
    if len(points) == 0:
        raise ValueError("cannot fit on an empty point set")
    return KnnModel(int(k), points)


def _vote(labels: np.ndarray, order_rank: np.ndarray, n_classes: int) -> int:
    """Majority among neighbour labels; ties go to the tied class with the closest member.

    ``order_rank`` gives each neighbour's position in (distance, index) order.
    """
    votes = np.bincount(labels, minlength=n_classes)
    tied = np.flatnonzero(votes == votes.max())
    if tied.size == 1:
        return int(tied[0])
    best = min(tied, key=lambda c: order_rank[labels == c].min())
    return int(best)


def knn_predict(model: KnnModel, x) -> int:
    """Majority label among the k nearest stored points (Euclidean).

    Equal distances are ordered by stored index; equal votes go to the label
    of the nearest neighbour among the tied labels.
    """
    x = np.asarray(x, dtype=float)
    X, y = model.points.X, model.points.y
    if x.shape != (X.shape[1],):
        raise ValueError(f"expected a vector of length {X.shape[1]}, got shape {x.shape}")
    d2 = np.sum((X - x) ** 2, axis=1)
    nearest = np.argsort(d2, kind="stable")[: model.k]
    return _vote(y[nearest], np.arange(model.k), int(y.max()) + 1)


def knn_predict_batch(model: KnnModel, Xq) -> np.ndarray:
    """Same rule as :func:`knn_predict` for many queries at once."""
    Xq = np.asarray(Xq, dtype=float)
    X, y = model.points.X, model.points.y
    if Xq.ndim != 2 or Xq.shape[1] != X.shape[1]:
        raise ValueError(f"expected rows of length {X.shape[1]}, got shape {Xq.shape}")
    k = model.k
    n_classes = int(y.max()) + 1
    chunk = max(1, 2_000_000 // X.shape[0])
    out = np.empty(Xq.shape[0], dtype=np.int64)
    for s in range(0, Xq.shape[0], chunk):
        Q = Xq[s:s + chunk]
        # exact differences, not the expanded |a|^2 - 2ab + |b|^2 form, so ties stay ties
        d2 = np.sum((Q[:, None, :] - X[None, :, :]) ** 2, axis=2)
        kth = np.partition(d2, k - 1, axis=1)[:, k - 1:k]
        below = d2 < kth
        at = d2 == kth
        need = k - below.sum(axis=1, keepdims=True)
        take = below | (at & (np.cumsum(at, axis=1) <= need))
        votes = np.stack([(take & (y == c)).sum(axis=1) for c in range(n_classes)], axis=1)
        top = votes.max(axis=1, keepdims=True)
        out[s:s + len(Q)] = np.argmax(votes, axis=1)
        for r in np.flatnonzero((votes == top).sum(axis=1) > 1):
            idx = np.flatnonzero(take[r])
            rank = np.lexsort((idx, d2[r, idx]))
            order_rank = np.empty(k, dtype=np.int64)
            order_rank[rank] = np.arange(k)
            out[s + r] = _vote(y[idx], order_rank, n_classes)
    return out
