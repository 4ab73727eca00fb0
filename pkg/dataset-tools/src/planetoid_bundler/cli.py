"""Command line for the bundle converter.

    planetoid-bundler convert --dataset cora --raw <dir> --out <dir>
    planetoid-bundler verify --bundle <dir> [--report <report.json>]
"""

from __future__ import annotations

import argparse
import os
import sys

from .convert import (
    ConversionReport,
    MissingRawFile,
    UnknownDataset,
    convert_planetoid,
    verify_bundle,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="planetoid-bundler")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="raw Planetoid files -> bundle")
    p.add_argument("--dataset", required=True, help="cora | citeseer | pubmed")
    p.add_argument("--raw", required=True, help="directory with ind.<name>.* files")
    p.add_argument("--out", required=True, help="bundle output directory")

    p = sub.add_parser("verify", help="recount a bundle against its report")
    p.add_argument("--bundle", required=True, help="bundle directory")
    p.add_argument("--report", default=None,
                   help="expected report (default: <bundle>/report.json)")
    return parser


def run_cli(argv) -> int:
    try:
        args = _build_parser().parse_args(list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.command == "convert":
        try:
            report = convert_planetoid(args.raw, args.dataset, args.out)
        except (MissingRawFile, UnknownDataset) as exc:
            print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
            return 1
        print(f"{report.dataset}: {report.num_nodes} nodes, "
              f"{report.num_edges} edges ({report.num_edges_stored} stored, "
              f"{report.num_self_loops} raw self-loops dropped), "
              f"{report.num_features} features, {report.num_classes} classes, "
              f"splits {report.train_size}/{report.val_size}/{report.test_size}")
        print(f"wrote bundle to {args.out}")
        return 0

    report_path = args.report or os.path.join(args.bundle, "report.json")
    try:
        with open(report_path, encoding="utf-8") as fh:
            expected = ConversionReport.from_json(fh.read())
    except OSError as exc:
        print(f"error: cannot read report: {exc}", file=sys.stderr)
        return 1
    result = verify_bundle(args.bundle, expected)
    if result.passed:
        print(f"{args.bundle}: verified against {report_path}")
        return 0
    for diff in result.diffs:
        print(f"mismatch: {diff}", file=sys.stderr)
    return 1


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
