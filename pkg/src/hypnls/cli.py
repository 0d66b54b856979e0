"""Command line entry point.

    hypnls <experiment> [--config FILE] [--out DIR] [--force]
                        [--override key=value ...]

Exit codes: 0 — run completed and all checks passed; 1 — run completed but
at least one check failed; 2 — configuration error (unknown experiment or
key, malformed value, pre-existing output directory); 3 — runtime abort
(boundary reflection or blow-up detected by the solver).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import EXPERIMENTS, ConfigError, apply_overrides, parse_config_text, resolve_config
from .experiments import run_experiment
from .integrator import SimulationAbort


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hypnls",
        description="radial (non)linear Schrodinger runs on hyperbolic 3-space",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS, help="experiment to run")
    parser.add_argument("--config", type=Path, default=None, help="key=value config file")
    parser.add_argument("--out", type=Path, required=True, help="output directory")
    parser.add_argument(
        "--force", action="store_true", help="overwrite an existing output directory"
    )
    parser.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config key (repeatable)",
    )
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        raw = {}
        if args.config is not None:
            try:
                text = args.config.read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read config file: {exc}") from None
            raw = parse_config_text(text)
        raw = apply_overrides(raw, args.override)
        cfg = resolve_config(args.experiment, raw)
        return run_experiment(cfg, args.out, force=args.force)
    except ConfigError as exc:
        print(f"hypnls: configuration error: {exc}", file=sys.stderr)
        return 2
    except SimulationAbort as exc:
        print(f"hypnls: run aborted: {exc}", file=sys.stderr)
        return 3


def console_entry():
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
