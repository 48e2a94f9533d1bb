"""Deep feedforward regressor: tansig hidden layers, linear scalar output.

The network regresses the integer class code; :mod:`wavediag.diagnose` turns
the scalar into a decision. Inputs are min-max normalized with statistics
fitted on the training set and stored inside the model.
"""

from __future__ import annotations

import enum
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import preprocess
from .diagnose import round_decisions
from .errors import ModelFormatError
from .preprocess import NormalizerStats
from .signal import CLASS_COUNT, LabeledPointSet

log = logging.getLogger(__name__)

MAGIC = "DFNMODEL v1"
DEFAULT_LAYERS = (4,) + (16,) * 9 + (1,)


def tansig(x):
    """Hyperbolic-tangent sigmoid, 2 / (1 + exp(-2x)) - 1.

    Evaluated as ``tanh``, which is the same function without the overflow
    of ``exp(-2x)`` for large negative x.
    """
    return np.tanh(x)


def purelin(x):
    return x


@dataclass(frozen=True)
class MLPConfig:
    layer_sizes: tuple[int, ...] = DEFAULT_LAYERS
    hidden_activation: str = "tansig"
    output_activation: str = "purelin"
    learning_rate: float = 0.01
    goal_mse: float = 1e-4
    max_epochs: int = 2000
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "layer_sizes", tuple(int(n) for n in self.layer_sizes))
        sizes = self.layer_sizes
        if len(sizes) < 3:
            raise ValueError("need an input layer, at least one hidden layer and an output layer")
        if any(n < 1 for n in sizes):
            raise ValueError(f"layer sizes must be positive, got {sizes}")
        if sizes[-1] != 1:
            raise ValueError("the output layer must have exactly one neuron")
        if self.hidden_activation != "tansig" or self.output_activation != "purelin":
            raise ValueError("only tansig hidden layers with a purelin output are supported")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not self.goal_mse > 0:
            raise ValueError("goal_mse must be positive")
        if self.max_epochs < 1 or self.batch_size < 1:
            raise ValueError("max_epochs and batch_size must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def activations(self) -> list[str]:
        return [self.hidden_activation] * (len(self.layer_sizes) - 2) + [self.output_activation]


@dataclass(eq=False)
class MLPModel:
    weights: list[np.ndarray]  # layer l: (n_{l+1}, n_l)
    biases: list[np.ndarray]
    config: MLPConfig
    normalizer: NormalizerStats
    class_count: int = CLASS_COUNT

    def __post_init__(self):
        sizes = self.config.layer_sizes
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise ValueError("one weight matrix and bias vector per layer transition")
        for l, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.shape != (sizes[l + 1], sizes[l]) or b.shape != (sizes[l + 1],):
                raise ValueError(f"layer {l}: shapes {W.shape}/{b.shape} do not chain with {sizes}")
            if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {l}: non-finite parameter")
        if len(self.normalizer.feature_names) != sizes[0]:
            raise ValueError("normalizer width differs from the input layer")
        if self.class_count < 1:
            raise ValueError("class_count must be positive")

    @property
    def feature_names(self) -> tuple[str, ...]:
        return self.normalizer.feature_names

    def copy(self) -> "MLPModel":
        return MLPModel([W.copy() for W in self.weights], [b.copy() for b in self.biases],
                        self.config, self.normalizer, self.class_count)


class StopReason(enum.Enum):
    GoalReached = "GoalReached"
    MaxEpochs = "MaxEpochs"


@dataclass
class TrainReport:
    epochs_run: int
    mse_history: list[float] = field(default_factory=list)
    final_train_accuracy: float = 0.0
    stop_reason: StopReason = StopReason.MaxEpochs

    def to_text(self) -> str:
        first = self.mse_history[0] if self.mse_history else float("nan")
        last = self.mse_history[-1] if self.mse_history else float("nan")
        return (f"epochs_run: {self.epochs_run}\n"
                f"stop_reason: {self.stop_reason.value}\n"
                f"first_epoch_mse: {first:.6g}\n"
                f"final_mse: {last:.6g}\n"
                f"min_mse: {min(self.mse_history, default=float('nan')):.6g}\n"
                f"final_train_accuracy: {self.final_train_accuracy:.4f}\n")


# --- forward / backward ---------------------------------------------------

def _activations(weights, biases, X: np.ndarray) -> list[np.ndarray]:
    """Layer outputs for a batch of rows; the last entry is the linear output."""
    acts = [X]
    a = X
    last = len(weights) - 1
    for l, (W, b) in enumerate(zip(weights, biases)):
        z = a @ W.T + b
        a = purelin(z) if l == last else tansig(z)
        acts.append(a)
    return acts


def _input_matrix(model: MLPModel, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.ndim != 2 or X.shape[1] != model.config.layer_sizes[0]:
        raise ValueError(f"expected vectors of length {model.config.layer_sizes[0]}, got shape {x.shape}")
    return X, single


def forward(model: MLPModel, x_normalized):
    """Network output for one normalized vector (float) or a batch of rows (array)."""
    X, single = _input_matrix(model, x_normalized)
    out = _activations(model.weights, model.biases, X)[-1][:, 0]
    return float(out[0]) if single else out


def _gradients(weights, acts, targets):
    B = acts[0].shape[0]
    delta = 2.0 * (acts[-1] - targets[:, None]) / B
    gW = [None] * len(weights)
    gb = [None] * len(weights)
    for l in range(len(weights) - 1, -1, -1):
        gW[l] = delta.T @ acts[l]
        gb[l] = delta.sum(axis=0)
        if l:
            delta = (delta @ weights[l]) * (1.0 - acts[l] ** 2)
    return gW, gb


def _batch_arrays(batch) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(batch, tuple) and len(batch) == 2 and np.ndim(batch[1]) == 1 and np.ndim(batch[0]) == 2:
        X, t = batch
    else:
        batch = list(batch)
        if not batch:
            raise ValueError("backprop needs a non-empty batch")
        X = [x for x, _ in batch]
        t = [y for _, y in batch]
    X = np.asarray(X, dtype=float)
    t = np.asarray(t, dtype=float)
    if X.shape[0] == 0:
        raise ValueError("backprop needs a non-empty batch")
    return X, t


def backprop(model: MLPModel, batch) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Gradient of the batch-mean squared error w.r.t. every weight and bias.

    ``batch`` is a list of ``(x_normalized, target)`` pairs or an ``(X, t)``
    tuple of arrays.
    """
    X, t = _batch_arrays(batch)
    X, _ = _input_matrix(model, X)
    if t.shape != (X.shape[0],):
        raise ValueError("one target per input vector")
    acts = _activations(model.weights, model.biases, X)
    return _gradients(model.weights, acts, t)


def loss(model: MLPModel, batch) -> float:
    X, t = _batch_arrays(batch)
    out = forward(model, np.atleast_2d(X))
    return float(np.mean((out - t) ** 2))


# --- training -------------------------------------------------------------

def init_params(sizes: Sequence[int], rng: np.random.Generator):
    weights, biases = [], []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        lim = 1.0 / math.sqrt(n_in)
        weights.append(rng.uniform(-lim, lim, size=(n_out, n_in)))
        biases.append(rng.uniform(-lim, lim, size=n_out))
    return weights, biases


def train(config: MLPConfig, data: LabeledPointSet, class_count: int = CLASS_COUNT,
          progress_every: int = 0) -> tuple[MLPModel, TrainReport]:
    """Fit the normalizer on ``data`` and train by mini-batch SGD on MSE.

    Stops once the whole-set MSE after an epoch is at or below
    ``config.goal_mse``, or after ``config.max_epochs``. The result is a pure
    function of ``(config, data, class_count)``.
    """
    if len(data) == 0:
        raise ValueError("cannot train on an empty point set")
    if data.X.shape[1] != config.layer_sizes[0]:
        raise ValueError(f"data has {data.X.shape[1]} features, network expects {config.layer_sizes[0]}")
    if data.y.min() < 0 or data.y.max() >= class_count:
        raise ValueError(f"labels must lie in 0..{class_count - 1}")

    stats = preprocess.fit(data)
    X = preprocess.apply(stats, data.X)
    t = data.y.astype(float)
    n = X.shape[0]
    bs = config.batch_size
    lr = config.learning_rate

    rng = np.random.default_rng(config.seed)
    weights, biases = init_params(config.layer_sizes, rng)

    history: list[float] = []
    reason = StopReason.MaxEpochs
    for epoch in range(config.max_epochs):
        perm = rng.permutation(n)
        Xp, tp = X[perm], t[perm]
        for s in range(0, n, bs):
            acts = _activations(weights, biases, Xp[s:s + bs])
            gW, gb = _gradients(weights, acts, tp[s:s + bs])
            for l in range(len(weights)):
                weights[l] -= lr * gW[l]
                biases[l] -= lr * gb[l]
        out = _activations(weights, biases, X)[-1][:, 0]
        mse = float(np.mean((out - t) ** 2))
        if not math.isfinite(mse):
            raise FloatingPointError(f"training diverged at epoch {epoch + 1}")
        history.append(mse)
        if progress_every and (epoch + 1) % progress_every == 0:
            log.info("epoch %d mse %.6g", epoch + 1, mse)
        if mse <= config.goal_mse:
            reason = StopReason.GoalReached
            break

    model = MLPModel(weights, biases, config, stats, class_count)
    acc = float(np.mean(round_decisions(out, class_count) == data.y))
    return model, TrainReport(len(history), history, acc, reason)


def predict(model: MLPModel, raw_compressed_point):
    """Normalize with the embedded statistics, then run the network."""
    X, single = _input_matrix(model, raw_compressed_point)
    out = forward(model, preprocess.apply(model.normalizer, X))
    return float(out[0]) if single else out


# --- persistence ----------------------------------------------------------

def _f(v: float) -> str:
    return f"{v:.17g}"


def model_to_text(model: MLPModel) -> str:
    cfg = model.config
    norm = model.normalizer
    for name in norm.feature_names:
        if not name or any(c.isspace() for c in name):
            raise ValueError(f"feature name {name!r} cannot be stored (empty or contains whitespace)")
    lines = [
        MAGIC,
        "layers: " + " ".join(str(n) for n in cfg.layer_sizes),
        "activations: " + " ".join(cfg.activations),
        f"classes: {model.class_count}",
        f"training: learning_rate={_f(cfg.learning_rate)} goal_mse={_f(cfg.goal_mse)} "
        f"max_epochs={cfg.max_epochs} batch_size={cfg.batch_size} seed={cfg.seed}",
        f"normalizer: {len(norm.feature_names)} {_f(norm.target_lo)} {_f(norm.target_hi)}",
    ]
    for name, lo, hi, deg in zip(norm.feature_names, norm.x_min, norm.x_max, norm.degenerate_flags):
        lines.append(f"feature: {name} {_f(lo)} {_f(hi)} {int(deg)}")
    for l, (W, b) in enumerate(zip(model.weights, model.biases)):
        for i, row in enumerate(W):
            lines.append(f"W {l} {i} : " + " ".join(_f(v) for v in row))
        lines.append(f"b {l} : " + " ".join(_f(v) for v in b))
    lines.append("end")
    return "\n".join(lines) + "\n"


def save_model(model: MLPModel, path) -> None:
    """Write atomically: a crash leaves either the old file or the new one."""
    text = model_to_text(model)
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class _Lines:
    def __init__(self, text: str):
        self.lines = text.split("\n")
        if self.lines and self.lines[-1] == "":
            self.lines.pop()
        self.i = 0

    def next(self, what: str) -> str:
        if self.i >= len(self.lines):
            raise ModelFormatError(f"unexpected end of file, expected {what}")
        self.i += 1
        return self.lines[self.i - 1]

    def field(self, key: str) -> str:
        line = self.next(f"'{key}:'")
        prefix = key + ":"
        if not line.startswith(prefix):
            raise ModelFormatError(f"line {self.i}: expected '{prefix}', got {line[:40]!r}")
        return line[len(prefix):].strip()

    def reals(self, prefix: str, count: int) -> np.ndarray:
        line = self.next(repr(prefix))
        if not line.startswith(prefix):
            raise ModelFormatError(f"line {self.i}: expected {prefix!r}, got {line[:40]!r}")
        try:
            vals = np.array([float(v) for v in line[len(prefix):].split()])
        except ValueError:
            raise ModelFormatError(f"line {self.i}: non-numeric value") from None
        if vals.size != count:
            raise ModelFormatError(f"line {self.i}: expected {count} values, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise ModelFormatError(f"line {self.i}: non-finite parameter")
        return vals


def model_from_text(text: str) -> MLPModel:
    src = _Lines(text)
    if src.next("header") != MAGIC:
        raise ModelFormatError(f"line 1: not a {MAGIC!r} file")
    try:
        sizes = tuple(int(v) for v in src.field("layers").split())
        acts = src.field("activations").split()
        classes = int(src.field("classes"))
        training = dict(kv.split("=", 1) for kv in src.field("training").split())
        cfg = MLPConfig(
            layer_sizes=sizes,
            hidden_activation=acts[0] if acts else "",
            output_activation=acts[-1] if acts else "",
            learning_rate=float(training["learning_rate"]),
            goal_mse=float(training["goal_mse"]),
            max_epochs=int(training["max_epochs"]),
            batch_size=int(training["batch_size"]),
            seed=int(training["seed"]),
        )
        if acts != cfg.activations:
            raise ModelFormatError(f"activations {acts} do not match layers {sizes}")
        n_feat, lo, hi = src.field("normalizer").split()
        n_feat = int(n_feat)
        if n_feat != sizes[0]:
            raise ModelFormatError(f"normalizer has {n_feat} features, input layer has {sizes[0]}")
        names, mins, maxs = [], [], []
        for _ in range(n_feat):
            parts = src.field("feature").split()
            if len(parts) != 4:
                raise ModelFormatError(f"line {src.i}: feature line needs name, min, max, flag")
            name, fmin, fmax, flag = parts
            fmin, fmax = float(fmin), float(fmax)
            if int(flag) != int(fmin == fmax):
                raise ModelFormatError(f"line {src.i}: degenerate flag disagrees with min/max")
            names.append(name)
            mins.append(fmin)
            maxs.append(fmax)
        stats = NormalizerStats(tuple(names), mins, maxs, float(lo), float(hi))
        weights, biases = [], []
        for l in range(len(sizes) - 1):
            W = np.stack([src.reals(f"W {l} {i} :", sizes[l]) for i in range(sizes[l + 1])])
            weights.append(W)
            biases.append(src.reals(f"b {l} :", sizes[l + 1]))
        if src.next("'end'") != "end":
            raise ModelFormatError(f"line {src.i}: expected 'end'")
        if src.i != len(src.lines):
            raise ModelFormatError(f"line {src.i + 1}: trailing content after 'end'")
        return MLPModel(weights, biases, cfg, stats, classes)
    except ModelFormatError:
        raise
    except (ValueError, KeyError, IndexError) as exc:
        raise ModelFormatError(f"line {src.i}: {exc}") from None


def load_model(path) -> MLPModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_text(fh.read())
