"""Command-line interface: ``doubletopt {synth,prep,solve,audit,report}``."""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import fileio
from .config import RunConfig, load_config, parse_scenario
from .errors import DoubletOptError, IoError
from .model import BlockProblem, ScenarioConfig
from .scenarios import OK, aggregate, prepare_blocks, solve_prepared
from .solver import BlockSolution, Budget, InstalledDoublet, audit_solution
from .units import from_lps

log = logging.getLogger("doubletopt")

# rates on disk carry three decimals in l/s
FILE_RATE_RESOLUTION = from_lps(0.0005)
COORD_TOL = 1e-6


def _config(args) -> RunConfig:
    cfg = load_config(getattr(args, "config", None))
    if getattr(args, "scenario", None):
        cfg.scenarios = tuple(parse_scenario(s) for s in args.scenario)
    if getattr(args, "workers", None):
        cfg.workers = args.workers
    if getattr(args, "budget_time", None) or getattr(args, "budget_nodes", None):
        cfg.budget = Budget(
            max_nodes=args.budget_nodes or cfg.budget.max_nodes,
            max_time=args.budget_time or cfg.budget.max_time,
        )
    return cfg


def _series(records_by_scenario):
    """Figure input: per-scenario rates and counts over blocks with candidates."""
    out = []
    for q_min, r_delta, records in records_by_scenario:
        analysed = [r for r in records if r.status == OK and r.n_lines > 0]
        out.append((q_min, r_delta, [math.fsum(r.rates_lps) for r in analysed], [len(r.rates_lps) for r in analysed]))
    return out


def cmd_synth(args) -> int:
    from .synthetic import make_city

    blocks, field_ = make_city(args.blocks, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fileio.write_geometry(blocks, out / "geometry.geojson")
    fileio.write_field(field_, out / "field.csv")
    print(f"wrote {len(blocks)} blocks to {out}")
    return 0


def cmd_prep(args) -> int:
    cfg = _config(args)
    blocks = fileio.read_geometry(args.geometry)
    field_ = fileio.read_field(args.field)
    prepared = prepare_blocks(blocks, field_, cfg.prep, cfg.workers)
    fileio.write_candidates(prepared, args.out)
    n_wells = sum(pb.n_wells for _, pb, _ in prepared if pb is not None)
    failed = [bid for bid, pb, _ in prepared if pb is None]
    print(f"{len(prepared)} blocks, {n_wells} candidate wells, {len(failed)} failed")
    return 1 if failed else 0


def cmd_solve(args) -> int:
    cfg = _config(args)
    blocks = fileio.read_geometry(args.geometry)
    field_ = fileio.read_field(args.field)
    prepared = prepare_blocks(blocks, field_, cfg.prep, cfg.workers)
    runs = solve_prepared(prepared, cfg.scenario_configs(), cfg.budget, cfg.workers)
    out = Path(args.out)
    fileio.write_results(runs, out, timings=args.timings)
    (out / "run.ini").write_text(cfg.to_ini())
    if args.figures:
        from .plotting import render_figures
        from .scenarios import to_record

        series = _series(
            [(r.report.q_min_lps, r.report.r_delta, [to_record(o) for o in r.outcomes]) for r in runs]
        )
        render_figures(series, args.figures)
    failed = 0
    for run in runs:
        rep = run.report
        print(
            f"q_min={rep.q_min_lps:g} r_delta={rep.r_delta:g}: {rep.total_doublets} doublets, "
            f"{rep.total_rate_lps:.3f} l/s, {len(run.failed)} failed"
        )
        failed += len(run.failed)
    return 1 if failed else 0


def _block_tables(results: Path):
    tables = sorted(results.glob("blocks_*.csv"))
    if not tables:
        raise IoError(f"{results}: no blocks_*.csv tables found")
    for table in tables:
        tag = table.stem.removeprefix("blocks_")
        yield tag, table, results / f"doublets_{tag}.geojson"


def cmd_audit(args) -> int:
    results = Path(args.results)
    if args.config is None and (results / "run.ini").exists():
        args.config = results / "run.ini"
    cfg = _config(args)
    blocks = fileio.read_geometry(args.geometry)
    field_ = fileio.read_field(args.field)
    prepared = {bid: pb for bid, pb, _ in prepare_blocks(blocks, field_, cfg.prep, cfg.workers)}
    n_bad = 0
    for tag, table, doublets in _block_tables(results):
        meta, rows = fileio.read_table(table)
        sc = ScenarioConfig(
            from_lps(float(meta["q_min_lps"])), float(meta["r_delta"]), float(meta["delta_min"]), cfg.prep.min_well_rate
        )
        by_block: dict[str, list[dict]] = {}
        for d in fileio.read_features(doublets):
            by_block.setdefault(str(d["block_id"]), []).append(d)
        for row in rows:
            bid = row["block_id"]
            if row["status"] != OK:
                continue
            pb = prepared.get(bid)
            if pb is None:
                print(f"{tag} {bid}: block missing from inputs")
                n_bad += 1
                continue
            wells = {w.well_id: w for line in pb.lines for w in line.wells}
            installed = []
            for d in by_block.get(bid, []):
                ext, inj = wells.get(d["ext_well_id"]), wells.get(d["inj_well_id"])
                if ext is None or inj is None:
                    print(f"{tag} {bid}: doublet on line {d['line_id']} names unknown wells")
                    n_bad += 1
                    continue
                (ex, ey), (ix, iy) = d["coordinates"]
                if max(abs(ex - ext.x), abs(ey - ext.y), abs(ix - inj.x), abs(iy - inj.y)) > COORD_TOL:
                    print(f"{tag} {bid}: doublet on line {d['line_id']} does not sit on its candidate wells")
                    n_bad += 1
                installed.append(InstalledDoublet(d["line_id"], d["ext_well_id"], d["inj_well_id"], from_lps(d["q_lps"])))
            sol = BlockSolution(bid, tuple(installed), bool(int(row["proven_optimal"] or 0)), 0.0, 0)
            for v in audit_solution(sol, BlockProblem(bid, pb.lines, sc), rate_resolution=FILE_RATE_RESOLUTION):
                print(f"{tag} {bid}: {v}")
                n_bad += 1
    print(f"audit: {n_bad} violations")
    return 1 if n_bad else 0


def cmd_report(args) -> int:
    results = Path(args.results)
    written = {(r.q_min_lps, r.r_delta): r for r in fileio.read_report(results / "report.csv")}
    recomputed = []
    by_scenario = []
    problems = []
    for tag, table, doublets in _block_tables(results):
        meta, records = fileio.read_block_records(table, doublets)
        q_min, r_delta = float(meta["q_min_lps"]), float(meta["r_delta"])
        rep = aggregate(q_min, r_delta, records)
        recomputed.append(rep)
        by_scenario.append((q_min, r_delta, records))
        n_ok = sum(1 for r in records if r.status == OK)
        if rep.blocks_with + rep.blocks_without != n_ok:
            problems.append(f"{tag}: blocks_with + blocks_without != {n_ok}")
        if not math.isclose(rep.mean_doublet_rate_lps * rep.total_doublets, rep.total_rate_lps, rel_tol=1e-9, abs_tol=1e-9):
            problems.append(f"{tag}: mean doublet rate times doublets differs from total rate")
        old = written.get((q_min, r_delta))
        if old is None:
            problems.append(f"{tag}: no row in report.csv")
        elif fileio.format_report_row(old) != fileio.format_report_row(rep):
            problems.append(f"{tag}: report.csv row differs from recomputed aggregates")
    out = args.out or results / "report_recomputed.csv"
    fileio.write_report(recomputed, out)
    if args.figures:
        from .plotting import render_figures

        render_figures(_series(by_scenario), args.figures)
    for p in problems:
        print(p)
    print(f"report: {len(recomputed)} scenarios checked, {len(problems)} problems")
    return 1 if problems else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="doubletopt", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def inputs(p):
        p.add_argument("geometry", help="GeoJSON with block and building polygons")
        p.add_argument("field", help="CSV of groundwater samples")
        p.add_argument("--config", help="INI run configuration")
        p.add_argument("--workers", type=int)

    p = sub.add_parser("synth", help="write a synthetic city and groundwater field")
    p.add_argument("--blocks", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("prep", help="emit candidate wells only")
    inputs(p)
    p.add_argument("--out", required=True, help="candidate wells GeoJSON")
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("solve", help="full pipeline over the scenario matrix")
    inputs(p)
    p.add_argument("--scenario", action="append", metavar="QMIN,RDELTA", help="q_min in l/s and r_delta; repeatable")
    p.add_argument("--budget-time", type=float, help="seconds per block and scenario")
    p.add_argument("--budget-nodes", type=int, help="branch-and-bound nodes per block and scenario")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--timings", action="store_true", help="also write per-block solve times")
    p.add_argument("--figures", help="directory for distribution figures")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("audit", help="re-check written solutions against the inputs")
    inputs(p)
    p.add_argument("results", help="output directory of a solve run")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("report", help="recompute aggregates from per-block files")
    p.add_argument("results", help="output directory of a solve run")
    p.add_argument("--out", help="where to write the recomputed report table")
    p.add_argument("--figures", help="directory for distribution figures")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except DoubletOptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
