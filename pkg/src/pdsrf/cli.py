"""Command-line front end: evaluate classifiers, generate streams, inspect config.

The evaluate subcommand runs one classifier through the block harness, writes
the per-block report CSV and, unless told otherwise, renders an accuracy
curve image next to it.
"""

from __future__ import annotations

import argparse
from itertools import islice
from pathlib import Path
import sys
import time

from .baseline import MajorityClassifier, RfRtlClassifier
from .classifier import PdsrfClassifier, PdsrfConfig
from .errors import ConfigError, StreamFormatError
from .evaluation import emit_report, mean_accuracy, run_block_evaluation
from .stream import (DriftSpec, generate_drift_stream, read_csv_stream,
                     scan_csv_schema, write_stream_csv)

_CONFIG_FLAGS = {
    "block_size": int,
    "window_size": int,
    "k_neighbors": int,
    "n_trees": int,
    "mtry": int,
    "min_leaf_size": int,
    "max_depth": int,
    "epsilon": float,
    "alpha": float,
    "replacement_threshold": float,
    "max_replacements_per_block": int,
    "seed": int,
}


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("classifier configuration")
    group.add_argument("--config", metavar="FILE",
                       help="key=value file; explicit flags take precedence")
    for name, kind in _CONFIG_FLAGS.items():
        group.add_argument("--" + name.replace("_", "-"), type=kind,
                           default=None, dest=name)


def _parse_config_file(path) -> dict:
    values = {}
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_no}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if key not in _CONFIG_FLAGS:
                raise ConfigError(f"{path}:{line_no}: unknown config key {key!r}")
            try:
                values[key] = _CONFIG_FLAGS[key](value.strip())
            except ValueError:
                raise ConfigError(f"{path}:{line_no}: bad value for {key}: {value!r}")
    return values


def resolve_config(args) -> PdsrfConfig:
    """Defaults, overlaid by the config file, overlaid by explicit flags."""
    values = {}
    if getattr(args, "config", None):
        values.update(_parse_config_file(args.config))
    for name in _CONFIG_FLAGS:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    return PdsrfConfig(**values)


def parse_synthetic_spec(text: str) -> DriftSpec:
    """Comma-separated key=value generator spec.

    Keys: n (sample count, required), drift (none|sudden|gradual), at (drift
    start index), until (gradual drift end index), features, noise.
    """
    keys = {"n": int, "drift": str, "at": int, "until": int,
            "features": int, "noise": float}
    parsed = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "=" not in part:
            raise ConfigError(f"synthetic spec entry {part!r} is not key=value")
        key, _, value = part.partition("=")
        key = key.strip()
        if key not in keys:
            raise ConfigError(f"unknown synthetic spec key {key!r}")
        try:
            parsed[key] = keys[key](value.strip())
        except ValueError:
            raise ConfigError(f"bad value for synthetic spec key {key}: {value!r}")
    if "n" not in parsed:
        raise ConfigError("synthetic spec needs n=<sample count>")
    return DriftSpec(n_samples=parsed["n"],
                     n_features=parsed.get("features", 5),
                     drift=parsed.get("drift", "none"),
                     drift_start=parsed.get("at"),
                     drift_end=parsed.get("until", parsed.get("at")),
                     noise=parsed.get("noise", 0.0))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdsrf",
        description="Proximity-driven streaming random forest for drifting "
                    "data streams.")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evaluate", help="run a classifier through the "
                                         "test-then-train block harness")
    source = ev.add_mutually_exclusive_group(required=True)
    source.add_argument("--data", metavar="CSV",
                        help="labeled sample stream, one sample per row")
    source.add_argument("--synthetic", metavar="SPEC",
                        help="generator spec, e.g. "
                             "'drift=sudden,n=45000,at=15000,noise=0.05'")
    ev.add_argument("--model", required=True,
                    choices=["pdsrf", "rf-rtl", "majority"])
    ev.add_argument("--out", required=True, metavar="CSV",
                    help="per-block report destination")
    ev.add_argument("--label-column", type=int, default=-1,
                    help="label column index in --data (default: last)")
    ev.add_argument("--limit", type=int, default=None, metavar="N",
                    help="stop after the first N samples")
    ev.add_argument("--no-figure", action="store_true",
                    help="skip the accuracy-curve image next to the report")
    ev.add_argument("--progress", action="store_true",
                    help="print running accuracy to stderr during the run")
    _add_config_flags(ev)

    gen = sub.add_parser("generate", help="write a synthetic drift stream "
                                          "to CSV")
    gen.add_argument("--drift", choices=["none", "sudden", "gradual"],
                     default="none")
    gen.add_argument("--at", type=int, default=None,
                     help="sample index where drift starts")
    gen.add_argument("--until", type=int, default=None,
                     help="sample index where gradual drift completes")
    gen.add_argument("--n", type=int, required=True, help="sample count")
    gen.add_argument("--features", type=int, default=5)
    gen.add_argument("--noise", type=float, default=0.0,
                     help="label flip probability")
    gen.add_argument("--seed", type=int, default=42)
    gen.add_argument("--out", required=True, metavar="CSV")

    ins = sub.add_parser("inspect", help="show the fully resolved "
                                         "configuration")
    ins.add_argument("--print-config", action="store_true")
    _add_config_flags(ins)
    return parser


def _figure_path(out: Path) -> Path:
    candidate = out.with_suffix(".png")
    if candidate == out:
        candidate = out.with_name(out.stem + "_curve.png")
    return candidate


def _cmd_evaluate(args) -> int:
    config = resolve_config(args)
    if args.data:
        schema = scan_csv_schema(args.data, label_column=args.label_column)
        samples = read_csv_stream(args.data, schema)
        n_classes, n_features = schema.n_classes, schema.n_features
        source_name = Path(args.data).name
    else:
        spec = parse_synthetic_spec(args.synthetic)
        samples = generate_drift_stream(spec, seed=config.seed)
        n_classes, n_features = spec.n_classes, spec.n_features
        source_name = f"synthetic({args.synthetic})"
    if args.limit is not None:
        if args.limit < 1:
            raise ConfigError("--limit must be positive")
        samples = islice(samples, args.limit)

    if args.model == "pdsrf":
        classifier = PdsrfClassifier(config, n_classes, n_features)
    elif args.model == "rf-rtl":
        classifier = RfRtlClassifier(config, n_classes, n_features)
    else:
        classifier = MajorityClassifier(n_classes)

    progress = None
    if args.progress:
        def progress(row):
            if row.block_index % 25 == 0:
                print(f"block {row.block_index}: acc={row.accuracy:.3f} "
                      f"running mean={row.cumulative_mean_accuracy:.3f}",
                      file=sys.stderr)

    started = time.perf_counter()
    metrics = run_block_evaluation(classifier, samples, config.block_size,
                                   progress=progress)
    wall_ms = (time.perf_counter() - started) * 1000.0

    out = Path(args.out)
    emit_report(metrics, out)
    if not args.no_figure:
        from .plots import save_accuracy_curve
        save_accuracy_curve(metrics, _figure_path(out),
                            title=f"{args.model} on {source_name}")
    print(f"mean_accuracy={mean_accuracy(metrics)!r} "
          f"blocks={len(metrics)} wall_ms={int(round(wall_ms))}")
    return 0


def _cmd_generate(args) -> int:
    spec = DriftSpec(n_samples=args.n, n_features=args.features,
                     drift=args.drift, drift_start=args.at,
                     drift_end=args.until if args.until is not None else args.at,
                     noise=args.noise)
    count = write_stream_csv(generate_drift_stream(spec, seed=args.seed),
                             args.out)
    print(f"wrote {count} samples to {args.out}")
    return 0


def _cmd_inspect(args, parser) -> int:
    if not args.print_config:
        parser.error("inspect requires --print-config")
    config = resolve_config(args)
    for part in config.as_text().split(" "):
        print(part)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "evaluate":
            return _cmd_evaluate(args)
        if args.command == "generate":
            return _cmd_generate(args)
        return _cmd_inspect(args, parser)
    except (ConfigError, StreamFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
