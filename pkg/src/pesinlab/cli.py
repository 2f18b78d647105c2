"""Command-line entry point.

    pesinlab run --config cfg.json [--out DIR] [--threads N]
    pesinlab list-systems
    pesinlab validate --config cfg.json

Exit codes: 0 all checks passed, 2 some check failed, 1 runtime error,
64 invalid configuration. PESINLAB_THREADS is the fallback for --threads.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import ConfigInvalid
from .experiments import run, validate_config, write_report
from .systems import available_systems

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CHECKS_FAILED = 2
EXIT_CONFIG = 64


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config {path!r} is not valid JSON: {exc}") from exc


def _threads(value: int | None) -> int:
    if value is not None:
        return max(1, value)
    env = os.environ.get("PESINLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            print(f"ignoring malformed PESINLAB_THREADS={env!r}", file=sys.stderr)
    return 1


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="pesinlab",
        description="Reproducible hyperbolicity experiments on built-in maps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a JSON config")
    p_run.add_argument("--config", required=True, help="path to the JSON config")
    p_run.add_argument("--out", default=".", help="output directory (default: .)")
    p_run.add_argument("--threads", type=int, default=None, help="worker threads")

    sub.add_parser("list-systems", help="print registered systems and defaults")

    p_val = sub.add_parser("validate", help="validate a config without running")
    p_val.add_argument("--config", required=True, help="path to the JSON config")

    args = parser.parse_args(argv)

    if args.command == "list-systems":
        for name, params in available_systems().items():
            if params:
                rendered = ", ".join(f"{k}={v}" for k, v in params.items())
                print(f"{name} ({rendered})")
            else:
                print(name)
        return EXIT_OK

    if args.command == "validate":
        try:
            cfg = validate_config(_load_config(args.config))
        except ConfigInvalid as exc:
            print(f"invalid config: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"ok: {cfg.experiment} on {cfg.system.name} (seed {cfg.seed})")
        return EXIT_OK

    # run
    try:
        cfg = validate_config(_load_config(args.config))
    except ConfigInvalid as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = run(cfg, out_dir=args.out, threads=_threads(args.threads))
    path = write_report(report, args.out, cfg.output)
    print(path)
    if report.error is not None:
        print(f"error: {report.error}", file=sys.stderr)
        return EXIT_ERROR
    for name, ok in sorted(report.passes.items()):
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return EXIT_OK if report.passed else EXIT_CHECKS_FAILED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
