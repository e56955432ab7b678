"""Batch front door: ``amalgamlab check|run|describe --config run.toml``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .amalgam import LEFT, h_membership
from .config import ConfigError, Contexts, RunConfig, build, config_dict, load_config
from .experiments import (
    ExperimentSpec,
    Table,
    exp_claim1,
    exp_claim2,
    exp_delta,
    exp_distortion,
    exp_gromov_escape,
    exp_quasiconvexity,
    exp_vn_index,
    twisted_conjugacy,
)
from .metric import ConstantsReport, DistanceOracle
from .torus import TorusElement
from .words import check_small_cancellation

log = logging.getLogger("amalgamlab")


@dataclass
class ExperimentResult:
    name: str
    label: str
    status: str
    table: Table | None = None
    error: str = ""
    files: list = field(default_factory=list)


@dataclass
class RunReport:
    results: list
    constants: ConstantsReport
    config: dict
    seed: int
    warnings: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def ok(self) -> bool:
        return all(r.status == "ok" for r in self.results)


class _Bench:
    """Groups plus a lazily built distance oracle shared by the experiments of one run."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.ctx: Contexts = build(cfg, check_hypotheses=False)
        self._oracle = None

    @property
    def oracle(self) -> DistanceOracle:
        if self._oracle is None:
            self._oracle = DistanceOracle(self.ctx.amalgam, forward_radius=self.cfg.caps.ball_radius)
        return self._oracle


def _run_one(bench: _Bench, spec: ExperimentSpec) -> Table:
    ctx, p, caps = bench.ctx, spec.params, bench.cfg.caps
    M = ctx.amalgam
    if spec.name == "distortion":
        return exp_distortion(ctx.torus, ctx.x, p["N"])
    if spec.name == "delta":
        group = {"base": ctx.base, "torus": ctx.torus, "amalgam": M}[p["group"]]
        return exp_delta(group, p["radii"], p["samples"], spec.seed, p["exhaustive"],
                         caps.distance_cap)
    if spec.name == "quasiconvexity":
        sub = p["subgroup"]
        if sub == "x":
            group = ctx.base

            def member(e):
                return M.edge_membership(LEFT, TorusElement(e, 0)) is not None
        elif sub == "F":
            group = ctx.torus

            def member(e):
                return e.k == 0
        elif sub == "C":
            group, member = M, M.in_c
        else:
            group, member = M, h_membership
        return exp_quasiconvexity(group, member, p["radius"])
    if spec.name == "claim1":
        return exp_claim1(M, ctx.y, range(p["n_min"], p["n_max"] + 1))
    if spec.name == "claim2":
        return exp_claim2(M, p["q"], ctx.y, p["n_max"], p["exact_n_max"], caps.distance_cap,
                          oracle=bench.oracle)
    if spec.name == "escape":
        return exp_gromov_escape(M, p["z"], ctx.y, p["h_radius"], p["n_max"],
                                 caps.distance_cap, oracle=bench.oracle)
    if spec.name == "vn":
        tables = [exp_vn_index(M, g, range(1, p["radius_max"] + 1)) for g in p["g"]]
        return Table("vn", tables[0].header if tables else ("g", "radius", "coset_count"),
                     [row for t in tables for row in t.rows])
    raise ValueError(f"unknown experiment {spec.name}")


def _attempt(bench, spec) -> ExperimentResult:
    try:
        table = _run_one(bench, spec)
    except Exception as exc:  # recorded per experiment; the run goes on
        log.exception("experiment %s failed", spec.output)
        return ExperimentResult(spec.name, spec.output, "error",
                                error=f"{type(exc).__name__}: {exc}")
    return ExperimentResult(spec.name, spec.output, "ok", table)


def _worker(args):
    cfg, spec = args
    return _attempt(_Bench(cfg), spec)


def _warnings(ctx: Contexts) -> list:
    out = []
    hit = twisted_conjugacy(ctx.torus, ctx.x, ctx.y)
    if hit is not None:
        j, k, m = hit
        fmt = ctx.base.alphabet.format
        out.append(f"phi^{j}(y^{k}) is conjugate in F to x^{m} (y={fmt(ctx.y)}, x={fmt(ctx.x)}): "
                   "a power of y is conjugate to a power of x in the mapping torus")
    return out


def run(cfg: RunConfig, fail_fast: bool = False, threads: int = 1) -> RunReport:
    """Execute the configured experiments in declaration order."""
    start = time.perf_counter()
    bench = _Bench(cfg)
    results: list[ExperimentResult] = []
    if threads > 1 and not fail_fast and len(cfg.experiments) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_worker, [(cfg, s) for s in cfg.experiments]))
    else:
        for spec in cfg.experiments:
            res = _attempt(bench, spec)
            results.append(res)
            if fail_fast and res.status != "ok":
                break
    constants = ConstantsReport(caps=asdict(cfg.caps))
    for r in results:
        if r.table is None:
            continue
        s = r.table.summary
        if r.name == "delta":
            constants.delta_hat = s["delta_hat"]
        elif r.name == "claim1":
            constants.K_hat = s["K_hat"]
        elif r.name == "claim2":
            constants.D_hat = s["D_hat"]
        elif r.name == "quasiconvexity":
            constants.epsilon_profile = s["epsilon_profile"]
        elif r.name == "distortion":
            constants.distortion_table = s["distortion_table"]
    return RunReport(results, constants, config_dict(cfg), cfg.seed, _warnings(bench.ctx),
                     time.perf_counter() - start)


def _cell(v) -> str:
    return "" if v is None else str(v)


def emit_report(report: RunReport, out_dir, fmt: str = "both") -> list[Path]:
    """Write one CSV per table and/or ``summary.json``; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for r in report.results:
        r.files = []
    if fmt in ("csv", "both"):
        for r in report.results:
            if r.table is None:
                continue
            path = out / f"{r.label}.csv"
            with open(path, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(r.table.header)
                w.writerows([_cell(c) for c in row] for row in r.table.rows)
            r.files.append(path.name)
            written.append(path)
    if fmt in ("json", "both"):
        experiments = []
        for r in report.results:
            entry = {"name": r.name, "label": r.label, "status": r.status, "files": r.files}
            if r.error:
                entry["error"] = r.error
            if r.table is not None:
                entry["summary"] = r.table.summary
                if fmt == "json":
                    entry["header"] = list(r.table.header)
                    entry["rows"] = [[_cell(c) for c in row] for row in r.table.rows]
            experiments.append(entry)
        summary = {
            "version": __version__,
            "seed": report.seed,
            "constants": asdict(report.constants),
            "config": report.config,
            "warnings": report.warnings,
            "experiments": experiments,
        }
        path = out / "summary.json"
        path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(path)
    return written


def describe(cfg: RunConfig) -> str:
    ctx = build(cfg, check_hypotheses=False)
    base, torus, M = ctx.base, ctx.torus, ctx.amalgam
    fmt = base.alphabet.format
    lines = [
        f"mode: {cfg.mode}",
        f"base generators: {' '.join(base.alphabet.names)}",
    ]
    if cfg.mode == "surface":
        rep = check_small_cancellation(base.presentation)
        lines.append(f"relators: {', '.join(cfg.relators)}")
        lines.append(f"max piece / min relator: {rep.max_piece_length}/{rep.min_relator_length}"
                     f" = {rep.metric_ratio} (C'(1/6): {rep.satisfies})")
    lines.append("phi:     " + ", ".join(f"{k} -> {v}" for k, v in cfg.forward.items()))
    lines.append("phi^-1:  " + ", ".join(f"{k} -> {v}" for k, v in cfg.backward.items()))
    lines.append(f"torus alphabet: {' '.join(torus.alphabet.names)}")
    lines.append(f"amalgam alphabet: {' '.join(M.alphabet.names)}")
    lines.append(f"edge: x = {fmt(ctx.x)} identified with x1 = {fmt(M.xs[1])}")
    lines.append(f"y = {fmt(ctx.y)}")
    if cfg.mode == "free":
        growth = [len(torus.phi.power_apply(n, ctx.x)) for n in range(11)]
        lines.append(f"|phi^n(x)|, n=0..10: {growth}")
    lines.append(f"caps: {asdict(cfg.caps)}")
    for e in cfg.experiments:
        lines.append(f"experiment {e.output}: {e.name} {e.params} seed={e.seed}")
    for w in _warnings(ctx):
        lines.append(f"warning: {w}")
    return "\n".join(lines)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="amalgamlab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("check", "validate a config and its hypotheses"),
                       ("run", "run the configured experiments"),
                       ("describe", "print the constructed groups and presets")):
        s = sub.add_parser(name, help=text)
        s.add_argument("--config", required=True, help="TOML run configuration")
        if name == "run":
            s.add_argument("--out", help="output directory (overrides the config)")
            s.add_argument("--fail-fast", action="store_true")
            s.add_argument("--threads", type=int, default=1)
            s.add_argument("--format", choices=("csv", "json", "both"), default="both")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"{args.config}: {exc} [{exc.reason}]", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2
    if args.command == "check":
        ctx = build(cfg)
        for w in _warnings(ctx):
            print(f"warning: {w}")
        print("ok")
        return 0
    if args.command == "describe":
        print(describe(cfg))
        return 0
    if args.threads < 1:
        print("--threads must be positive", file=sys.stderr)
        return 2
    report = run(cfg, fail_fast=args.fail_fast, threads=args.threads)
    out_dir = args.out or cfg.out
    try:
        emit_report(report, out_dir, args.format)
    except OSError as exc:
        print(f"cannot write outputs: {exc}", file=sys.stderr)
        return 2
    for r in report.results:
        line = f"{r.label}: {r.status}"
        print(line + (f" ({r.error})" if r.error else ""))
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"wall time {report.wall_time:.1f}s", file=sys.stderr)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
