"""Command-line entry point: ``selregion {surface,optimize,compare,validate,route}``.

Exit status is 0 on success, 1 when ``validate`` has a failing check and 2 for
configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .experiments import COMMANDS, ConfigError, build_config, load_config, run, sidecar, sidecar_path
from .errors import InvalidParameterError

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="selregion", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file (a previous run's sidecar also works)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", dest="output", help="output path; CSV goes to stdout when omitted")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--trials", type=int)
        sp.add_argument("--mode", choices=("semi", "physical"))
        sp.add_argument("--workers", type=int)
        if name == "validate":
            sp.add_argument("--tolerance", type=float, help="replace every check threshold")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        raw = load_config(args.config) if args.config else {}
        config = build_config(args.command, raw, **overrides)
    except (ConfigError, InvalidParameterError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    table, meta = run(config)
    if config.output:
        table.write(config.output, config.format)
        sidecar_path(config.output).write_text(json.dumps(sidecar(config, meta), indent=1) + "\n")
    else:
        sys.stdout.write(table.to_csv() if config.format == "csv" else table.to_json())
    if meta.get("failures"):
        print(f"{meta['failures']} validation check(s) failed", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
