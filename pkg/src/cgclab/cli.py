"""Command-line front end: ``generate``, ``train`` and ``report``.

Exit codes: 0 ok, 2 invalid config or input, 3 degenerate training
(more than half the epochs formed no cluster), 4 incompatible inputs.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import contextlib
import dataclasses
import json
import os
import sys
from pathlib import Path

from .datagen import DatasetSpec, file_fingerprint, generate, load_dataset, save_dataset
from .exceptions import ConfigError
from .experiments import IncompatibleRuns, delta_strategies, report, sweep_configs, write_run
from .trainer import ABLATIONS, TrainConfig

EXIT_OK, EXIT_CONFIG, EXIT_DEGENERATE, EXIT_INCOMPATIBLE = 0, 2, 3, 4

# fields whose default is None need an explicit parser
_NONE_DEFAULT_TYPES = {"iters_per_epoch": int, "total_epochs": int}


def _bool(text):
    lowered = text.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text}")


def _int_list(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _override_fields(cls=TrainConfig, prefix=""):
    """``(dotted key, flag, parser)`` for every scalar config field, nested ones flattened."""
    defaults = cls()
    out = []
    for f in dataclasses.fields(cls):
        value = getattr(defaults, f.name)
        key = prefix + f.name
        if dataclasses.is_dataclass(value):
            out += _override_fields(type(value), key + ".")
            continue
        if isinstance(value, bool):
            parser = _bool
        elif isinstance(value, tuple):
            parser = _int_list
        elif value is None:
            parser = _NONE_DEFAULT_TYPES[f.name]
        else:
            parser = type(value)
        out.append((key, "--" + key.replace(".", "-").replace("_", "-"), parser))
    return out


def _apply_overrides(data: dict, args) -> dict:
    for key, flag, _ in _override_fields():
        value = getattr(args, "cfg__" + key.replace(".", "__"))
        if value is None:
            continue
        node = data
        *parents, leaf = key.split(".")
        for p in parents:
            node = node.setdefault(p, {})
        node[leaf] = value
    return data


def _read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc


def cmd_generate(args) -> int:
    spec = DatasetSpec.from_dict(_read_json(args.spec))
    fingerprint = save_dataset(generate(spec), args.out)
    print(fingerprint)
    return EXIT_OK


def cmd_train(args) -> int:
    data = _read_json(args.config) if args.config else {}
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    config = TrainConfig.from_dict(_apply_overrides(data, args))
    if args.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    if args.ablation:
        config = config.with_ablation(args.ablation)
    try:
        dataset = load_dataset(args.data)
    except FileNotFoundError as exc:
        raise ConfigError(f"dataset not found: {args.data}") from exc
    data = Path(args.data)
    fingerprint = file_fingerprint(data / "dataset.csv" if data.is_dir() else data.with_suffix(".csv"))

    if args.sweep_beta:
        runs = sweep_configs(config, betas=args.sweep_beta)
    elif args.sweep_delta:
        runs = sweep_configs(config, strategies=delta_strategies())
    else:
        runs = [(args.run_id or (args.ablation or "run"), config, {})]

    jobs = min(args.jobs, _thread_cap() or args.jobs, len(runs))
    tasks = [(dataset, cfg, Path(args.out) / run_id, run_id, fingerprint, extra) for run_id, cfg, extra in runs]
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_run_one, tasks))
    else:
        results = [_run_one(t) for t in tasks]

    degenerate = False
    for (run_dir, n_bad, n_epochs), task in zip(results, tasks):
        print(run_dir)
        if n_epochs and n_bad > n_epochs / 2:
            print(f"error: {n_bad}/{n_epochs} degenerate epochs in {task[3]}", file=sys.stderr)
            degenerate = True
    return EXIT_DEGENERATE if degenerate else EXIT_OK


def _run_one(task):
    run_dir, traces, _ = write_run(*task)
    return str(run_dir), sum(t.degenerate for t in traces), len(traces)


def cmd_report(args) -> int:
    paths = report(args.runs, args.out)
    for p in paths.values():
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cgclab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic dataset")
    gen.add_argument("--spec", required=True, help="dataset spec JSON")
    gen.add_argument("--out", required=True, help="output directory")
    gen.set_defaults(func=cmd_generate)

    tr = sub.add_parser("train", help="train one run or a sweep")
    tr.add_argument("--config", help="run config JSON (defaults when omitted)")
    tr.add_argument("--data", required=True, help="dataset directory written by `generate`")
    tr.add_argument("--out", required=True, help="parent directory for run directories")
    tr.add_argument("--ablation", choices=sorted(ABLATIONS))
    tr.add_argument("--run-id")
    tr.add_argument("--jobs", type=int, default=1, help="sweep runs trained in parallel processes")
    sweep = tr.add_mutually_exclusive_group()
    sweep.add_argument("--sweep-beta", type=_float_list, metavar="B1,B2,...")
    sweep.add_argument("--sweep-delta", action="store_true", help="linear, dynamic and constant {-0.1, 0, 0.1}")
    for key, flag, parse in _override_fields():
        tr.add_argument(flag, dest="cfg__" + key.replace(".", "__"), type=parse, default=None)
    tr.set_defaults(func=cmd_train)

    rep = sub.add_parser("report", help="compare run directories")
    rep.add_argument("runs", nargs="+")
    rep.add_argument("--out", required=True)
    rep.set_defaults(func=cmd_report)
    return parser


def _thread_cap():
    n = os.environ.get("CGCLAB_THREADS")
    if not n:
        return None
    try:
        value = int(n)
    except ValueError as exc:
        raise ConfigError(f"CGCLAB_THREADS must be a positive integer, got {n!r}") from exc
    if value < 1:
        raise ConfigError(f"CGCLAB_THREADS must be a positive integer, got {n!r}")
    return value


def _thread_limit():
    cap = _thread_cap()
    if cap is None:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=cap)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with _thread_limit():
            return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IncompatibleRuns as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCOMPATIBLE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
