"""xborder command line: run scenarios, verify audit exports, render tables."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .audit import ExportError, verify_export
from .errors import ConfigError
from .simkit import ArchitectureVariant, load_config, run_all, self_check
from .simkit.report import render_csv, render_text

ENV_CONFIG = "XBORDER_CONFIG"

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _split(value: str | None) -> list | None:
    if not value:
        return None
    return [v.strip() for v in value.split(",") if v.strip()]


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=os.environ.get(ENV_CONFIG),
                   help=f"scenario YAML (default: ${ENV_CONFIG}, else the packaged default)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--scenarios", default="A,B,C", help="comma-separated subset of A,B,C")
    p.add_argument("--variants", help="comma-separated subset of " + ",".join(v.value for v in ArchitectureVariant))
    p.add_argument("--jobs", type=int, default=1, help="worker processes for scenario cells")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xborder", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run scenarios and write results, tables and the audit export")
    _add_run_flags(run)
    run.add_argument("--out", default="results", help="output directory (default: ./results)")
    run.add_argument("--format", choices=("text", "csv", "both"), default="both",
                     help="which rendered tables to print to stdout")

    check = sub.add_parser("self-check", help="run scenarios and exit nonzero if an invariant fails")
    _add_run_flags(check)
    check.add_argument("--out", help="optionally also write the result bundle here")

    ver = sub.add_parser("verify-audit", help="re-verify every record of an audit export")
    ver.add_argument("records", help="records.jsonl")
    ver.add_argument("manifest", help="audit_manifest.json")

    tab = sub.add_parser("tables", help="render Tables I-III from a results.json")
    tab.add_argument("results", help="results.json written by 'run'")
    tab.add_argument("--measured", help="measured.json, for the MTTV column")
    tab.add_argument("--format", choices=("text", "csv"), default="text")
    return parser


def _load(args):
    config = load_config(args.config)
    if args.seed is not None:
        config = config.with_overrides(seed=args.seed)
    return config


def _run(args, out_dir):
    config = _load(args)
    return config, run_all(
        config,
        scenarios=_split(args.scenarios) or ("A", "B", "C"),
        variants=_split(args.variants),
        out_dir=out_dir,
        jobs=args.jobs,
    )


def cmd_run(args) -> int:
    config, bundle = _run(args, args.out)
    if args.format in ("text", "both"):
        sys.stdout.write(render_text(bundle["results"], bundle["measured"]))
    if args.format in ("csv", "both"):
        sys.stdout.write(render_csv(bundle["results"]))
    print(f"wrote {len(bundle['results']['cells'])} metric sets to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_self_check(args) -> int:
    config, bundle = _run(args, args.out)
    failed = 0
    for name, ok, detail in self_check(bundle, config):
        print(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
        failed += not ok
    return EXIT_FAILED if failed else EXIT_OK


def cmd_verify_audit(args) -> int:
    for path in (args.records, args.manifest):
        if not Path(path).is_file():
            print(f"error: cannot read {path}", file=sys.stderr)
            return EXIT_FAILED
    try:
        verified, failing = verify_export(args.records, args.manifest)
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    print(f"verified {verified} records")
    if failing is not None:
        print(f"error: record {failing} (line {failing + 1}) does not verify against the manifest root",
              file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def _read_json(path):
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"file not found: {p}")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: line {exc.lineno} col {exc.colno}: {exc.msg}") from exc


def cmd_tables(args) -> int:
    results = _read_json(args.results)
    if not isinstance(results, dict):
        raise ConfigError(f"{args.results}: expected a JSON object")
    results.setdefault("cells", [])
    measured = _read_json(args.measured) if args.measured else None
    try:
        text = render_csv(results) if args.format == "csv" else render_text(results, measured)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{args.results}: malformed results ({exc!r})") from exc
    sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "self-check": cmd_self_check, "verify-audit": cmd_verify_audit, "tables": cmd_tables}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
