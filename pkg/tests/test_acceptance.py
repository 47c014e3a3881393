"""Acceptance suite: one PASS/FAIL line per criterion.

Lines are collected in ``RESULTS`` and printed in the terminal summary
(see conftest.py), so they show up in a plain ``pytest`` run.
"""
import math
import time
from itertools import combinations

import numpy as np
import pytest
from shapely import affinity
from shapely.geometry import Point, box

from doubletopt import fileio
from doubletopt.cli import main
from doubletopt.config import DEFAULT_MATRIX, RunConfig
from doubletopt.field import GroundwaterField
from doubletopt.geometry import BlockGeometry, PrepConfig, prepare_block
from doubletopt.model import BlockProblem, ScenarioConfig, build_milp
from doubletopt.oracle import brute_force_optimum
from doubletopt.scenarios import OK, aggregate, run_matrix
from doubletopt.solver import audit_solution, solve_milp
from doubletopt.synthetic import make_city, random_problem
from doubletopt.tap import HydroSample, breakthrough_param, drawdown_limit, upconing_limit

RESULTS: dict[int, str] = {}

ORACLE_REL_TOL = 1e-6
ORACLE_TIME_LIMIT = 60.0
AUDIT_TOL = 1e-6
TAP_REL_TOL = 1e-9
ROTATION_REL_TOL = 1e-6
DISTANCE_TOL = 1e-6
CITY_TIME_LIMIT = 300.0
CITY_BLOCKS = 100
CITY_WORKERS = 4

# independent 40-digit evaluations of the three TAP formulas
TAP_DRAWDOWN_REF = 0.039
TAP_UPCONING_REF = 0.006471208681040655883
TAP_ALPHA_REF = 0.00001602853394688670019


def record(n, ok, detail):
    RESULTS[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(RESULTS[n])
    assert ok, RESULTS[n]


@pytest.fixture(scope="module")
def oracle_batch():
    problems = [random_problem(np.random.default_rng(seed)) for seed in range(200)]
    t0 = time.perf_counter()
    pairs = []
    for p in problems:
        sol = solve_milp(build_milp(p))
        ref, _ = brute_force_optimum(p)
        pairs.append((p, sol, ref))
    return pairs, time.perf_counter() - t0


def test_criterion_1_oracle_equivalence(oracle_batch):
    pairs, elapsed = oracle_batch
    worst = max(abs(sol.q_block - ref) / max(abs(ref), 1e-12) if ref or sol.q_block else 0.0 for _, sol, ref in pairs)
    ok = worst <= ORACLE_REL_TOL and elapsed < ORACLE_TIME_LIMIT and len(pairs) == 200
    record(1, ok, f"200 instances, worst relative error {worst:.2e}, {elapsed:.1f} s (limit {ORACLE_TIME_LIMIT:.0f} s)")


@pytest.fixture(scope="module")
def city_runs(tmp_path_factory):
    root = tmp_path_factory.mktemp("city")
    assert main(["synth", "--blocks", str(CITY_BLOCKS), "--seed", "0", "--out", str(root / "in")]) == 0
    walls = []
    for name in ("run_a", "run_b"):
        t0 = time.perf_counter()
        rc = main(
            [
                "solve",
                str(root / "in" / "geometry.geojson"),
                str(root / "in" / "field.csv"),
                "--workers", str(CITY_WORKERS),
                "--out", str(root / name),
                "--figures", str(root / f"{name}_figures"),
            ]
        )
        walls.append(time.perf_counter() - t0)
        assert rc == 0
    return root, walls


def test_criterion_2_audit(oracle_batch, city_runs):
    pairs, _ = oracle_batch
    n_inst = sum(len(audit_solution(sol, p, tol=AUDIT_TOL)) for p, sol, _ in pairs)
    root, _ = city_runs
    # blocks whose in-run audit finds anything are written with status "failed"
    statuses = []
    for table in sorted((root / "run_a").glob("blocks_*.csv")):
        statuses += [row["status"] for row in fileio.read_table(table)[1]]
    n_failed = sum(s != OK for s in statuses)
    rc = main(["audit", str(root / "in" / "geometry.geojson"), str(root / "in" / "field.csv"), str(root / "run_a")])
    ok = n_inst == 0 and n_failed == 0 and len(statuses) == CITY_BLOCKS * len(DEFAULT_MATRIX) and rc == 0
    record(
        2,
        ok,
        f"{n_inst} violations on 200 oracle instances; {n_failed} failed of {len(statuses)} city block-scenarios; "
        f"file audit exit {rc}",
    )


def test_criterion_3_monotonicity():
    blocks, field_ = make_city(20, seed=7)
    runs = run_matrix(blocks, field_, RunConfig().scenario_configs(), PrepConfig())
    obj = {(r.report.q_min_lps, r.report.r_delta): [o.solution.q_block for o in r.outcomes] for r in runs}
    proven = all(o.solution.proven_optimal for r in runs for o in r.outcomes)
    bad = 0
    checks = 0
    for b in range(len(blocks)):
        for q in (1.0, 5.0):
            seq = [obj[(q, r)][b] for r in (1.5, 2.0, 3.0)]
            for hi, lo in zip(seq, seq[1:]):
                checks += 1
                bad += lo > hi * (1 + 1e-9) + 1e-12
        for r in (1.5, 2.0, 3.0):
            checks += 1
            bad += obj[(5.0, r)][b] > obj[(1.0, r)][b] * (1 + 1e-9) + 1e-12
    record(3, bad == 0 and proven, f"{bad} violations in {checks} pairwise checks over 20 blocks; all proven optimal: {proven}")


def test_criterion_4_tap_spot_checks():
    qd = drawdown_limit(HydroSample(K=2e-3, B=10.0, h_n=0.0, h_max=0.0, grad_h=0.0))
    qf = upconing_limit(HydroSample(K=1e-3, B=10.0, h_n=0.0, h_max=1.0, grad_h=0.001))
    al = breakthrough_param(HydroSample(K=1e-3, B=10.0, h_n=0.0, h_max=0.0, grad_h=0.0, v_D=1e-6))
    errs = [abs(v - ref) / ref for v, ref in ((qd, TAP_DRAWDOWN_REF), (qf, TAP_UPCONING_REF), (al, TAP_ALPHA_REF))]
    record(4, max(errs) <= TAP_REL_TOL, f"q_d={qd:.6g} q_f={qf:.6g} alpha={al:.6g}; worst relative error {max(errs):.1e}")


def test_criterion_5_preprocessing():
    prep = PrepConfig()
    rich = GroundwaterField.uniform(K=2e-3, B=10.0, h_n=500.0, h_max=502.0, grad_h=2e-3)
    empty = prepare_block(BlockGeometry("E", box(0, 0, 50, 50), []), rich, prep)
    spacing_ok = empty.spacing == 7.5 and empty.n_wells <= 100

    buildings = [box(8, 30, 20, 42), affinity.rotate(box(28, 6, 40, 14), 25)]
    built = prepare_block(BlockGeometry("W", box(0, 0, 50, 50), buildings), rich, prep)
    min_clear = min(b.distance(Point(w.x, w.y)) for line in built.lines for w in line.wells for b in buildings)

    # west half has too little headroom for 1 l/s of injection
    mixed = GroundwaterField(
        np.array([[0.0, 25.0], [50.0, 25.0]]),
        np.array([[2e-3, 10.0, 500.0, 500.05, 2e-3, math.nan, 90.0], [2e-3, 10.0, 500.0, 502.0, 2e-3, math.nan, 90.0]]),
    )
    part = prepare_block(BlockGeometry("M", box(0, 0, 50, 50), []), mixed, prep)
    wells = [w for line in part.lines for w in line.wells]
    low = [w for w in wells if min(w.limits.q_d, w.limits.q_f) < prep.min_well_rate]
    ok = spacing_ok and min_clear >= 3.0 - 1e-7 and not low and wells and all(w.x > 25 for w in wells)
    record(
        5,
        ok,
        f"empty block: spacing {empty.spacing} m, {empty.n_wells} wells; min building clearance {min_clear:.3f} m; "
        f"{len(low)} sub-threshold wells kept",
    )


def _rotation_case(theta):
    block = box(0, 0, 42, 34)
    buildings = [box(14, 12, 24, 20)]
    rot = lambda g: affinity.rotate(g, theta, origin=(0, 0))  # noqa: E731
    field_ = GroundwaterField.uniform(K=3e-3, B=12.0, h_n=500.0, h_max=502.0, grad_h=3e-3, flow_azimuth_deg=90.0 - theta)
    g = BlockGeometry("R", rot(block), [rot(b) for b in buildings])
    pb = prepare_block(g, field_, PrepConfig())
    sol = solve_milp(build_milp(BlockProblem("R", pb.lines, ScenarioConfig(1e-3, 1.5))))
    xy = np.array([(w.x, w.y) for line in pb.lines for w in line.wells])
    return sol, xy


def test_criterion_6_rotation_invariance():
    base, xy0 = _rotation_case(0.0)
    turned, xy1 = _rotation_case(30.0)
    rel = abs(turned.q_block - base.q_block) / max(base.q_block, 1e-12)
    same_count = xy0.shape == xy1.shape
    dist_err = math.inf
    if same_count:
        d0 = np.array([np.hypot(*(xy0[i] - xy0[j])) for i, j in combinations(range(len(xy0)), 2)])
        d1 = np.array([np.hypot(*(xy1[i] - xy1[j])) for i, j in combinations(range(len(xy1)), 2)])
        dist_err = float(np.abs(d0 - d1).max())
    ok = same_count and rel < ROTATION_REL_TOL and dist_err <= DISTANCE_TOL and base.n_doublet > 0
    record(
        6,
        ok,
        f"objective {base.q_block * 1e3:.6f} vs {turned.q_block * 1e3:.6f} l/s (rel {rel:.1e}); "
        f"{len(xy0)} wells, max pair-distance change {dist_err:.1e} m",
    )


def test_criterion_7_determinism(city_runs):
    root, walls = city_runs
    a, b = root / "run_a", root / "run_b"
    names = sorted(p.name for p in a.iterdir())
    same_names = names == sorted(p.name for p in b.iterdir())
    differing = [n for n in names if (a / n).read_bytes() != (b / n).read_bytes()]
    figs_same = all(
        (root / "run_a_figures" / n).read_bytes() == (root / "run_b_figures" / n).read_bytes()
        for n in ("block_distributions.png", "rate_vs_doublets.png")
    )
    ok = same_names and not differing and figs_same and max(walls) < CITY_TIME_LIMIT
    record(
        7,
        ok,
        f"{len(names)} files, {len(differing)} differ; figures identical: {figs_same}; "
        f"wall times {walls[0]:.0f} s / {walls[1]:.0f} s at {CITY_WORKERS} workers (limit {CITY_TIME_LIMIT:.0f} s)",
    )


def test_criterion_8_report_arithmetic(city_runs, tmp_path):
    root, _ = city_runs
    rcs = [main(["report", str(root / name), "--out", str(tmp_path / f"{name}.csv")]) for name in ("run_a", "run_b")]
    bad = 0
    for name in ("run_a", "run_b"):
        for table in sorted((root / name).glob("blocks_*.csv")):
            tag = table.stem.removeprefix("blocks_")
            _, records = fileio.read_block_records(table, root / name / f"doublets_{tag}.geojson")
            rep = aggregate(1.0, 1.0, records)
            n_ok = sum(r.status == OK for r in records)
            bad += rep.blocks_with + rep.blocks_without != n_ok
            bad += not math.isclose(rep.mean_doublet_rate_lps * rep.total_doublets, rep.total_rate_lps, rel_tol=1e-12, abs_tol=1e-12)
    ok = rcs == [0, 0] and bad == 0
    record(8, ok, f"report verb exit codes {rcs}; {bad} invariant violations across {2 * len(DEFAULT_MATRIX)} scenario tables")
