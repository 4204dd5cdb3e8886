"""Command line entry point.

    fxy run <config|preset> [--output DIR] [--seed N] [--threads K] [--verbose]
    fxy validate <config|preset>
    fxy list-presets

Exit codes: 0 on success, 1 for an invalid config, 2 when the run itself fails.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

import orjson
from loguru import logger

from fxy.cli.config import ExperimentConfig, parse_config
from fxy.cli.presets import list_presets, preset_description, preset_path
from fxy.cli.runner import output_dir, run
from fxy.errors import ConfigError, ViolationsError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def setup_logging(verbose: bool = False):
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else "INFO")


def resolve_config_path(name: str) -> Path:
    """A config file, or the name of a bundled preset when no such file exists."""
    path = Path(name)
    if path.exists():
        return path
    try:
        return preset_path(name)
    except FileNotFoundError:
        return path


def error_record(e: BaseException) -> dict:
    return {
        "error": type(e).__name__,
        "message": str(e),
        "violations": (
            [{"path": p, "message": m} for p, m in e.violations]
            if isinstance(e, ViolationsError)
            else []
        ),
    }


def report_error(e: BaseException, outdir: Optional[Path] = None):
    record = error_record(e)
    if outdir is not None and outdir.is_dir():
        (outdir / "error.json").write_bytes(orjson.dumps(record, option=orjson.OPT_INDENT_2))
    sys.stderr.write(orjson.dumps(record).decode() + "\n")


def load(name: str) -> ExperimentConfig:
    return parse_config(resolve_config_path(name))


def cmd_run(args: argparse.Namespace) -> int:
    try:
        cfg = load(args.config)
    except ConfigError as e:
        report_error(e)
        return EXIT_CONFIG

    outdir = None
    try:
        outdir = output_dir(cfg, args.output)
        bundle = run(cfg, outdir, n_threads=args.threads, seed=args.seed)
    except Exception as e:
        logger.exception("{} run failed", cfg.protocol)
        report_error(e, outdir)
        return EXIT_RUNTIME
    logger.info("done: {}", bundle.outdir)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        cfg = load(args.config)
    except ConfigError as e:
        report_error(e)
        return EXIT_CONFIG
    logger.info("{}: valid {} config (hash {})", args.config, cfg.protocol, cfg.config_hash())
    return EXIT_OK


def cmd_list_presets(args: argparse.Namespace) -> int:
    for name in list_presets():
        sys.stdout.write(f"{name}\t{preset_description(name)}\n")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fxy", description="Floquet-engineered XX/YY transmon chain simulator"
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", parents=[common], help="run an experiment config and write its result bundle")
    p_run.add_argument("config", help="config file or bundled preset name")
    p_run.add_argument("--output", type=Path, default=None, help="output directory")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--threads", type=int, default=1, help="sweep worker threads")
    p_run.set_defaults(fn=cmd_run)

    p_validate = sub.add_parser("validate", parents=[common], help="check a config without running it")
    p_validate.add_argument("config", help="config file or bundled preset name")
    p_validate.set_defaults(fn=cmd_validate)

    p_list = sub.add_parser("list-presets", parents=[common], help="list the bundled presets")
    p_list.set_defaults(fn=cmd_list_presets)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    setup_logging(args.verbose)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
