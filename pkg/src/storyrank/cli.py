"""Command line entry point.

Subcommands:

* run            - execute an experiment config, write report.json/.csv/.md
* sweep-k        - pairs-per-item sweep, write sweep curve data
* report         - re-render a stored report.json as tables
* serve          - start the annotation HTTP service
* make-fixtures  - regenerate the bundled synthetic datasets

Failures exit nonzero with a one-line JSON error summary on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import fixtures, harness


def _split_names(raw: str | None) -> list[str] | None:
    if raw is None:
        return None
    return [name.strip() for name in raw.split(",") if name.strip()]


def _load_config(args) -> harness.ExperimentConfig:
    config = harness.ExperimentConfig.from_file(args.config)
    if args.seed is not None:
        config = replace(config, base_seed=args.seed)
    return config


def _write_report(report: harness.ExperimentReport, out: Path) -> list[str]:
    out.mkdir(parents=True, exist_ok=True)
    written = []
    report_path = out / "report.json"
    report_path.write_text(json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n",
                           encoding="utf-8")
    written.append(str(report_path))
    if report.cells:
        for fmt, suffix in ((harness.FORMAT_CSV, "csv"), (harness.FORMAT_MARKDOWN, "md")):
            path = out / f"report.{suffix}"
            harness.emit_report(report, fmt, path)
            written.append(str(path))
    return written


def cmd_run(args) -> int:
    config = _load_config(args)
    report = harness.run_experiment(config, projects=_split_names(args.projects))
    written = _write_report(report, Path(args.out))
    print(json.dumps({"written": written, "cells": len(report.cells),
                      "errors": list(report.errors)}))
    return 0


def cmd_sweep_k(args) -> int:
    config = _load_config(args)
    report, curves = harness.sweep_k(config, projects=_split_names(args.projects))
    out = Path(args.out)
    written = _write_report(report, out)
    sweep_path = out / "sweep.csv"
    harness.emit_sweep(curves, sweep_path)
    written.append(str(sweep_path))
    print(json.dumps({"written": written, "cells": len(report.cells),
                      "errors": list(report.errors)}))
    return 0


def cmd_report(args) -> int:
    report = harness.load_report(args.report)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt, suffix in ((harness.FORMAT_CSV, "csv"), (harness.FORMAT_MARKDOWN, "md")):
        path = out / f"report.{suffix}"
        harness.emit_report(report, fmt, path)
        written.append(str(path))
    print(json.dumps({"written": written}))
    return 0


def cmd_serve(args) -> int:
    from . import service

    datasets = service.load_datasets(args.data)
    service.serve(datasets, args.journal_dir, listen=args.listen,
                  tfidf_dim=args.tfidf_dim)
    return 0


def cmd_make_fixtures(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in _split_names(args.projects) or []:
        written.append(str(fixtures.write_project(name, out)))
    if args.with_ranking_fixture:
        for path in fixtures.write_ranking_fixture(out):
            written.append(str(path))
    print(json.dumps({"written": written}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="storyrank")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("--config", required=True, help="JSON experiment config")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--projects", help="comma-separated project name filter")
    run.add_argument("--seed", type=int, help="override the config base seed")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep-k", help="sweep pairs-per-item k for comparative models")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--projects")
    sweep.add_argument("--seed", type=int)
    sweep.set_defaults(func=cmd_sweep_k)

    rep = sub.add_parser("report", help="render a stored report.json as tables")
    rep.add_argument("--report", required=True, help="path to report.json")
    rep.add_argument("--out", required=True)
    rep.set_defaults(func=cmd_report)

    srv = sub.add_parser("serve", help="start the annotation service")
    srv.add_argument("--data", required=True, nargs="+",
                     help="backlog dataset files (CSV or JSONL)")
    srv.add_argument("--journal-dir", required=True,
                     help="directory for session journals")
    srv.add_argument("--listen", default="127.0.0.1:8765", help="host:port")
    srv.add_argument("--tfidf-dim", type=int, default=384)
    srv.set_defaults(func=cmd_serve)

    fix = sub.add_parser("make-fixtures", help="regenerate bundled synthetic datasets")
    fix.add_argument("--out", required=True)
    fix.add_argument("--projects", default="jirasoftware,usergrid")
    fix.add_argument("--with-ranking-fixture", action="store_true")
    fix.set_defaults(func=cmd_make_fixtures)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
