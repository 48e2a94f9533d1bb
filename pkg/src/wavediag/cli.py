"""Command-line entry point: ``wavediag <command> [options]``.

Every command accepts ``--config FILE`` with ``key = value`` lines whose keys
are the long option names (dashes or underscores); explicit flags win over
the file. Failures print one line starting with ``wavediag: error:`` and
exit non-zero.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import correlation, dfn, pipeline, synth
from .dfn import MLPConfig
from .errors import ParseError, WavediagError
from .signal import (
    ClassLabel,
    Recording,
    csv_header,
    iter_csv_windows,
    load_recording_csv,
    save_recording_csv,
)

PROG = "wavediag"
log = logging.getLogger(PROG)


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message.replace("\n", " "))


def default_seed() -> int:
    raw = os.environ.get("WAVEDIAG_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"WAVEDIAG_SEED must be an integer, got {raw!r}") from None


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _hidden(text: str) -> tuple[int, ...]:
    """``16x9`` or ``16,16,8``."""
    text = text.strip()
    if "x" in text:
        width, count = text.split("x", 1)
        return (int(width),) * int(count)
    return tuple(int(v) for v in _csv_list(text))


def _classes(text: str) -> tuple[int, ...]:
    return tuple(int(ClassLabel.parse(c)) for c in _csv_list(text))


def read_config(path) -> dict[str, str]:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"{path}: line {n}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def _apply_config(parser: argparse.ArgumentParser, path) -> None:
    values = read_config(path)
    actions = {a.dest: a for a in parser._actions if a.dest not in ("help", "config", "command")}
    unknown = sorted(set(values) - set(actions))
    if unknown:
        raise CliError(f"{path}: unknown config keys {unknown}")
    defaults = {}
    for key, raw in values.items():
        action = actions[key]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
        elif action.nargs in ("+", "*"):
            defaults[key] = [action.type(v) if action.type else v for v in raw.split()]
        else:
            try:
                defaults[key] = action.type(raw) if action.type else raw
            except (TypeError, ValueError) as exc:
                raise CliError(f"{path}: bad value for {key}: {exc}") from None
        if action.choices is not None and defaults[key] not in action.choices:
            raise CliError(f"{path}: {key} must be one of {sorted(action.choices)}")
        action.required = False
    parser.set_defaults(**defaults)


# --- commands ---------------------------------------------------------------

def cmd_synth(args) -> int:
    cfg = synth.SynthConfig(
        seed=args.seed,
        samples_per_class=args.samples_per_class,
        classes=args.classes,
        noise_sigma=args.noise_sigma,
        separation=args.separation,
        sample_rate_hz=args.sample_rate,
        fundamental_hz=args.fundamental,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for rec in synth.generate_dataset(cfg):
        name = ClassLabel(int(rec.labels[0])).name
        save_recording_csv(rec, out / f"{name}.csv")
        files.append({"file": f"{name}.csv", "class": name, "code": int(rec.labels[0]), "samples": len(rec)})
    manifest = {
        "generator": "wavediag.synth",
        "seed": cfg.seed,
        "samples_per_class": cfg.samples_per_class,
        "noise_sigma": cfg.noise_sigma,
        "separation": cfg.separation,
        "sample_rate_hz": cfg.sample_rate_hz,
        "fundamental_hz": cfg.fundamental_hz,
        "channels": list(cfg.channel_names),
        "files": files,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(files)} recordings to {out}")
    return 0


def _load_all(paths) -> list[Recording]:
    recs = [load_recording_csv(p) for p in paths]
    names = recs[0].channel_names
    for p, r in zip(paths, recs):
        if r.channel_names != names:
            raise CliError(f"{p}: channels {list(r.channel_names)} differ from {list(names)}")
    return recs


def cmd_features(args) -> int:
    recs = _load_all(args.inputs)
    if args.channels:
        recs = [r.select(args.channels) for r in recs]
    import numpy as np

    merged = Recording(recs[0].channel_names, recs[0].sample_rate_hz,
                       np.concatenate([r.samples for r in recs], axis=1))
    cm = correlation.correlation_matrix(merged)
    report = correlation.select_features(cm, args.threshold, args.fine_tune)
    if args.matrix:
        Path(args.matrix).write_text(cm.to_csv(), encoding="utf-8")
    text = report.to_text()
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


def cmd_compress(args) -> int:
    rec = load_recording_csv(args.input)
    if args.channels:
        rec = rec.select(args.channels)
    save_recording_csv(pipeline.compress_recording(rec, args.levels), args.out)
    return 0


def _dfn_config(args, n_features: int) -> MLPConfig:
    return MLPConfig(
        layer_sizes=(n_features, *args.hidden, 1),
        learning_rate=args.learning_rate,
        goal_mse=args.goal_mse,
        max_epochs=args.max_epochs,
        batch_size=args.batch_size,
        seed=args.seed,
    )


def _labeled(recs, paths):
    for p, r in zip(paths, recs):
        if r.labels is None:
            raise CliError(f"{p}: recording has no label column")


def cmd_train(args) -> int:
    recs = _load_all(args.inputs)
    _labeled(recs, args.inputs)
    features = args.features or list(recs[0].channel_names)
    points = pipeline.points_from_recordings(recs, features, args.levels)
    train, test = pipeline.stratified_split(points, args.split, args.seed)
    cfg = _dfn_config(args, len(features))
    model, report = dfn.train(cfg, train, progress_every=args.progress)
    test_metrics = pipeline.evaluate_dfn(model, test)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dfn.save_model(model, out / "model.dfn")
    (out / "train_report.txt").write_text(report.to_text(), encoding="utf-8")
    (out / "test_metrics.txt").write_text(test_metrics.to_text("DFN held-out"), encoding="utf-8")
    (out / "normalizer.csv").write_text(model.normalizer.to_csv(), encoding="utf-8")
    sys.stdout.write(report.to_text())
    sys.stdout.write(f"train_points: {len(train)}\ntest_points: {len(test)}\n")
    sys.stdout.write(test_metrics.to_text("DFN held-out"))
    return 0


def cmd_eval(args) -> int:
    model = dfn.load_model(args.model)
    recs = _load_all(args.inputs)
    _labeled(recs, args.inputs)
    points = pipeline.points_from_recordings(recs, model.feature_names, args.levels)
    train, test = pipeline.stratified_split(points, args.split, args.seed)
    subset = {"test": test, "train": train, "all": points}[args.subset]
    text = pipeline.evaluate_dfn(model, subset).to_text(f"DFN ({args.subset})")
    if args.baseline == "knn":
        km = pipeline.fit_knn(train, model.normalizer, args.k)
        text += "\n" + pipeline.evaluate_knn(km, model.normalizer, subset, model.class_count).to_text(
            f"KNN k={args.k} ({args.subset})")
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


def cmd_stream(args) -> int:
    model = dfn.load_model(args.model)
    block = 1 << args.levels
    if args.window_raw % block:
        raise CliError(f"window-raw {args.window_raw} must be divisible by 2**levels = {block}")
    names, _ = csv_header(args.input)
    missing = [n for n in model.feature_names if n not in names]
    if missing:
        raise CliError(f"{args.input}: missing model features {missing}")
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        windows = iter_csv_windows(args.input, args.window_raw)
        period = None
        for i, verdict in enumerate(pipeline.stream_verdicts(model, windows, args.levels, args.run_min)):
            if args.paced:
                period = period or args.window_raw / _rate(args.input)
                time.sleep(period)
            out.write(json.dumps(verdict.to_json_obj(i)) + "\n")
            out.flush()
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _rate(path) -> float:
    return next(iter_csv_windows(path, 2)).sample_rate_hz


def cmd_inspect(args) -> int:
    model = dfn.load_model(args.model)
    cfg = model.config
    n_params = sum(W.size + b.size for W, b in zip(model.weights, model.biases))
    lines = [
        f"layers: {' '.join(map(str, cfg.layer_sizes))}",
        f"activations: {' '.join(cfg.activations)}",
        f"classes: {model.class_count}",
        f"parameters: {n_params}",
        f"training: learning_rate={cfg.learning_rate} goal_mse={cfg.goal_mse} "
        f"max_epochs={cfg.max_epochs} batch_size={cfg.batch_size} seed={cfg.seed}",
        "normalizer:",
    ]
    st = model.normalizer
    for n, lo, hi, deg in zip(st.feature_names, st.x_min, st.x_max, st.degenerate_flags):
        lines.append(f"  {n}: [{lo:.6g}, {hi:.6g}]" + (" (flat)" if deg else ""))
    print("\n".join(lines))
    return 0


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    seed = default_seed()
    p = _Parser(prog=PROG, description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log training progress")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, func, help):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("--config", help="key = value file with defaults for this command")
        sp.set_defaults(func=func)
        return sp

    sp = command("synth", cmd_synth, "write synthetic labeled recordings, one CSV per class")
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int, default=seed)
    sp.add_argument("--samples-per-class", type=int, default=32_768)
    sp.add_argument("--classes", type=_classes, default=tuple(int(c) for c in ClassLabel))
    sp.add_argument("--noise-sigma", type=float, default=0.05)
    sp.add_argument("--separation", type=float, default=1.0)
    sp.add_argument("--sample-rate", type=float, default=16_000.0)
    sp.add_argument("--fundamental", type=float, default=100.0)

    sp = command("features", cmd_features, "correlation matrix and redundancy-based selection")
    sp.add_argument("inputs", nargs="+")
    sp.add_argument("--channels", type=_csv_list, default=None)
    sp.add_argument("--threshold", type=float, default=0.5)
    sp.add_argument("--fine-tune", type=int, default=1)
    sp.add_argument("--matrix", help="write the correlation matrix CSV here")
    sp.add_argument("--report", help="write the selection report here")

    sp = command("compress", cmd_compress, "Haar-compress a recording (the controller's wire payload)")
    sp.add_argument("input")
    sp.add_argument("--out", required=True)
    sp.add_argument("--levels", type=int, default=3)
    sp.add_argument("--channels", type=_csv_list, default=None)

    def split_opts(sp):
        sp.add_argument("--levels", type=int, default=3)
        sp.add_argument("--split", type=float, default=0.3, help="training fraction per class")
        sp.add_argument("--seed", type=int, default=seed)

    sp = command("train", cmd_train, "compress, split, normalize and train the network")
    sp.add_argument("inputs", nargs="+")
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--features", type=_csv_list, default=None)
    split_opts(sp)
    sp.add_argument("--hidden", type=_hidden, default=(16,) * 9, help="e.g. 16x9 or 32,16")
    sp.add_argument("--learning-rate", type=float, default=0.01)
    sp.add_argument("--goal-mse", type=float, default=1e-4)
    sp.add_argument("--max-epochs", type=int, default=2000)
    sp.add_argument("--batch-size", type=int, default=32)
    sp.add_argument("--progress", type=int, default=0, help="log every N epochs (with -v)")

    sp = command("eval", cmd_eval, "metrics for a trained model, optionally against KNN")
    sp.add_argument("inputs", nargs="+")
    sp.add_argument("--model", required=True)
    split_opts(sp)
    sp.add_argument("--subset", choices=("test", "train", "all"), default="test")
    sp.add_argument("--baseline", choices=("none", "knn"), default="none")
    sp.add_argument("--k", type=int, default=5)
    sp.add_argument("--out")

    sp = command("stream", cmd_stream, "windowed diagnosis, one NDJSON verdict per window")
    sp.add_argument("input")
    sp.add_argument("--model", required=True)
    sp.add_argument("--window-raw", type=int, default=160)
    sp.add_argument("--levels", type=int, default=3)
    sp.add_argument("--run-min", type=int, default=3)
    sp.add_argument("--paced", action="store_true", help="sleep one window period between verdicts")
    sp.add_argument("--out")

    sp = command("inspect-model", cmd_inspect, "print a model file summary")
    sp.add_argument("model")
    return p


def _parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        sub = parser._subparsers._group_actions[0].choices[args.command]
        _apply_config(sub, args.config)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = _parse(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(name)s: %(message)s")
        return args.func(args)
    except (CliError, WavediagError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"{PROG}: error: {str(msg).splitlines()[0] if str(msg) else type(exc).__name__}", file=sys.stderr)
        return 2 if isinstance(exc, CliError) else 1


if __name__ == "__main__":
    sys.exit(main())
