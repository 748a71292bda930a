"""Command-line entry point.

Stage subcommands (ingest, preprocess, sweep, fit, rank, match, themes,
dynamics, cluster, graphs, report) all take --config and --runs-dir and are
idempotent: a stage whose inputs are unchanged is skipped. `run` executes
every stage in order, `serve` exposes a finished run over HTTP, and
`fixture` writes the synthetic demo corpus.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .config import load_config
from .pipeline import STAGE_ORDER, PipelineRun, StageError
from .server import serve_forever
from .synthetic import fixture_corpus

STAGE_COMMANDS = STAGE_ORDER  # one subcommand per stage


def _add_stage_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="pipeline config JSON")
    parser.add_argument(
        "--runs-dir", default="runs", help="directory holding config-addressed runs"
    )
    parser.add_argument(
        "--force", action="store_true", help="re-run even when inputs are unchanged"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topicwatch",
        description="Weekly topic dynamics and user-activity monitoring pipeline",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="info-level logging")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in STAGE_COMMANDS:
        stage_parser = sub.add_parser(name, help=f"run the {name} stage")
        _add_stage_options(stage_parser)
        if name == "graphs":
            stage_parser.add_argument("--week", type=int, help="print one graph JSON")
            stage_parser.add_argument("--network", help="network for --week")
            stage_parser.add_argument(
                "--cluster", default="all", choices=["all", "main", "peak"]
            )

    run_parser = sub.add_parser("run", help="run every stage in order")
    _add_stage_options(run_parser)

    serve_parser = sub.add_parser("serve", help="serve a finished run over HTTP")
    serve_parser.add_argument(
        "--run-dir",
        default=os.environ.get("TOPICWATCH_RUN_DIR"),
        help="run directory (overrides --config lookup; env TOPICWATCH_RUN_DIR)",
    )
    serve_parser.add_argument("--config", help="pipeline config JSON (locates the run)")
    serve_parser.add_argument("--runs-dir", default="runs")
    serve_parser.add_argument(
        "--host", default=os.environ.get("TOPICWATCH_HOST", "127.0.0.1")
    )
    serve_parser.add_argument(
        "--port", type=int, default=int(os.environ.get("TOPICWATCH_PORT", "8750"))
    )
    serve_parser.add_argument(
        "--static-dir",
        default=os.environ.get("TOPICWATCH_STATIC_DIR"),
        help="also serve a dashboard build from /",
    )

    fixture_parser = sub.add_parser("fixture", help="write the synthetic demo corpus")
    fixture_parser.add_argument("--out", required=True, help="output JSONL path")
    fixture_parser.add_argument("--seed", type=int, default=7)
    fixture_parser.add_argument("--weeks", type=int, default=4)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    if args.command == "fixture":
        summary = fixture_corpus(args.out, n_weeks=args.weeks, seed=args.seed)
        print(
            f"wrote {summary['records']} records to {summary['path']} "
            f"({summary['per_network']})"
        )
        return 0

    if args.command == "serve":
        if args.run_dir:
            run_dir = Path(args.run_dir)
        elif args.config:
            config = load_config(args.config)
            run_dir = Path(args.runs_dir) / config.config_hash()
        else:
            print("serve needs --run-dir or --config", file=sys.stderr)
            return 2
        serve_forever(run_dir, host=args.host, port=args.port, static_dir=args.static_dir)
        return 0

    config = load_config(args.config)
    run = PipelineRun(config, args.runs_dir)
    try:
        if args.command == "run":
            statuses = run.run_all(force=args.force)
            for name, status in statuses.items():
                print(f"{name}: {status}")
        else:
            status = run.run_stage(args.command, force=args.force)
            print(f"{args.command}: {status}", file=sys.stderr if _wants_graph(args) else sys.stdout)
        if _wants_graph(args):
            rel = f"graphs/week{args.week:02d}_{args.network}_{args.cluster}.json"
            path = run.store.path(rel)
            if not path.exists():
                print(f"error: no graph artifact {rel}", file=sys.stderr)
                return 1
            print(path.read_text(encoding="utf-8"), end="")
            return 0
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"run directory: {run.run_dir}")
    return 0


def _wants_graph(args) -> bool:
    return (
        args.command == "graphs"
        and getattr(args, "week", None) is not None
        and getattr(args, "network", None) is not None
    )


if __name__ == "__main__":
    sys.exit(main())
