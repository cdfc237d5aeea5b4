#!/usr/bin/env python3
"""
contactlab - command-line entry point

Numerical verification of contact submanifold identities: runs the
selected suites over sampled points and writes a JSON report.

Exit status: 0 all verdicts pass, 1 violations, 2 configuration errors.
"""

import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from config.settings import settings
from geometry.immersion import catalog_list
from models.config_models import (
    ConfigError,
    RunConfig,
    load_run_config,
    parse_tolerance_overrides,
    read_run_config,
)
from models.report_models import ErrorDetail, ErrorResponse, RunReport, SuiteName, Verdict
from orchestrator.run_orchestrator import RunOrchestrator

logger = logging.getLogger(__name__)

stderr_console = Console(stderr=True)

EXIT_PASS = 0
EXIT_VIOLATIONS = 1
EXIT_CONFIG_ERROR = 2


def configure_logging(level: str):
    logging.basicConfig(
        level=level,
        format="%(name)s - %(message)s",
        handlers=[RichHandler(console=stderr_console, show_path=False, rich_tracebacks=True)],
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contactlab",
        description="Verify contact submanifold identities on sampled points and emit a JSON report",
    )
    parser.add_argument("--config", metavar="PATH", help="JSON run configuration")
    parser.add_argument("--catalog", metavar="NAME", help="run a built-in catalog entry without a config file")
    parser.add_argument("--samples", type=int, metavar="N", help=f"sample points (default {settings.SAMPLE_COUNT})")
    parser.add_argument("--seed", type=int, metavar="S", help=f"random seed (default {settings.RANDOM_SEED})")
    parser.add_argument("--tol", action="append", default=[], metavar="NAME=VAL", help="override a tolerance class (repeatable)")
    parser.add_argument(
        "--suite",
        action="append",
        default=[],
        choices=[s.value for s in SuiteName],
        help="suite to run (repeatable)",
    )
    parser.add_argument("--output", metavar="PATH", help="write the report here instead of stdout")
    parser.add_argument("--jsonl", metavar="PATH", help="also write one residual record per (suite, point)")
    parser.add_argument("--list-catalog", nargs="?", const="", metavar="FILTER", help="list catalog entries and exit")
    parser.add_argument("--schema", choices=["config", "report"], help="print a JSON schema and exit")
    parser.add_argument("--log-level", default=settings.LOG_LEVEL, help="logging level")
    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    """
    Merge the config file (or --catalog) with command-line overrides.

    Raises:
        ConfigError: missing source, unreadable file or invalid document
    """
    if args.config and args.catalog:
        raise ConfigError("use either --config or --catalog")
    if args.config:
        document: Dict[str, Any] = read_run_config(args.config)
    elif args.catalog:
        document = {"catalog": args.catalog}
    else:
        raise ConfigError("no configuration given (use --config PATH or --catalog NAME)")

    if isinstance(document, dict):
        if args.samples is not None:
            document["samples"] = args.samples
        if args.seed is not None:
            document["seed"] = args.seed
        if args.tol:
            document["tolerances"] = {**document.get("tolerances", {}), **parse_tolerance_overrides(args.tol)}
        if args.suite:
            document["suites"] = list(args.suite)
    return load_run_config(document)


def write_text(text: str, path: Optional[str]):
    if path:
        Path(path).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")


def write_jsonl(report: RunReport, path: str):
    with open(path, "w", encoding="utf-8") as handle:
        for record in report.residual_records():
            handle.write(json.dumps(record, sort_keys=True) + "\n")


def render_summary(report: RunReport):
    """Human-readable digest on stderr"""
    table = Table(title=f"contactlab: {report.entry} ({report.sample_count} points)")
    table.add_column("suite")
    table.add_column("residual")
    table.add_column("max", justify="right")
    table.add_column("tolerance", justify="right")
    table.add_column("refused", justify="right")
    table.add_column("verdict")
    for suite in report.suites:
        for key, stats in suite.stats.items():
            table.add_row(
                suite.suite.value,
                key,
                f"{stats.max:.3e}",
                f"{stats.tolerance:.0e}",
                str(stats.refused) if stats.refused else "",
                "✅" if stats.passed else "❌",
            )
        for failure in suite.failures:
            table.add_row(suite.suite.value, "finding", "", "", "", f"❌ {failure}")
    stderr_console.print(table)
    if report.classification is not None:
        stderr_console.print(f"📊 classification: {report.classification.value}")
    stderr_console.print(f"{'✅' if report.verdict == Verdict.PASS else '❌'} verdict: {report.verdict.value}")


def config_error_response(error: ConfigError) -> ErrorResponse:
    suggestion = None
    if "excluded-point predicate" in error.detail:
        suggestion = "list the degeneracy among the immersion's exclusions"
    return ErrorResponse(
        message="configuration rejected",
        error=ErrorDetail(code="config_error", message=error.detail, pointer=error.pointer),
        suggestion=suggestion,
    )


async def run_cli(args: argparse.Namespace) -> int:
    if args.schema:
        model = RunConfig if args.schema == "config" else RunReport
        write_text(json.dumps(model.model_json_schema(), indent=2), args.output)
        return EXIT_PASS

    if args.list_catalog is not None:
        entries = catalog_list(args.list_catalog)
        write_text(json.dumps([{"name": n, "description": d} for n, d in entries], indent=2), args.output)
        return EXIT_PASS

    try:
        config = build_config(args)
        report = await RunOrchestrator().run(config)
    except ConfigError as e:
        logger.error(f"❌ Configuration error at {e.pointer or '/'}: {e.detail}")
        write_text(config_error_response(e).model_dump_json(indent=2), args.output)
        return EXIT_CONFIG_ERROR

    write_text(report.to_json(), args.output)
    if args.jsonl:
        write_jsonl(report, args.jsonl)
    render_summary(report)
    return report.exit_code


def main(argv: Optional[List[str]] = None) -> int:
    """Main application entry point"""
    args = build_parser().parse_args(argv)
    try:
        configure_logging(args.log_level.upper())
    except ValueError as e:
        stderr_console.print(f"❌ {e}")
        return EXIT_CONFIG_ERROR

    try:
        return asyncio.run(run_cli(args))
    except KeyboardInterrupt:
        logger.warning("🛑 Run interrupted by user")
        return EXIT_VIOLATIONS


if __name__ == "__main__":
    sys.exit(main())
