#!/usr/bin/env python3
"""Run every experiment in a config and print each table to stdout.

    python3 scripts/run_all.py configs/default.toml --out out/default
"""

import argparse
import sys

from amalgamlab.cli import emit_report, run
from amalgamlab.config import load_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--out")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    cfg = load_config(args.config)
    report = run(cfg, threads=args.threads)
    for path in emit_report(report, args.out or cfg.out):
        print(f"wrote {path}", file=sys.stderr)
    for r in report.results:
        print(f"== {r.label} ({r.status})")
        if r.table is None:
            print(r.error)
            continue
        print(", ".join(r.table.header))
        for row in r.table.rows:
            print(", ".join("" if c is None else str(c) for c in row))
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
