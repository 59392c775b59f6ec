"""``zsl <experiment> --config PATH --output DIR [--threads N]``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import EXPERIMENTS, ConfigError, parse_config
from .experiments import EXIT_IO, run


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zsl", description="Line-soliton perturbation experiments.")
    sub = p.add_subparsers(dest="experiment", required=True, metavar="{" + ",".join(EXPERIMENTS) + "}")
    for name in EXPERIMENTS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, type=Path, help="JSON configuration file")
        sp.add_argument("--output", required=True, type=Path, help="output directory")
        sp.add_argument("--threads", type=int, default=1, help="worker cap for FFTs, sweeps and scans")
        sp.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.threads < 1:
        print("zsl: --threads must be >= 1", file=sys.stderr)
        return EXIT_IO
    try:
        text = args.config.read_bytes()
    except OSError as exc:
        print(f"zsl: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        for path, reason in exc.errors:
            print(f"zsl: config error at {path or '<root>'}: {reason}", file=sys.stderr)
        return EXIT_IO
    return run(args.experiment, cfg, args.output, args.threads)


if __name__ == "__main__":
    sys.exit(main())
