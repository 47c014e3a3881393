import pytest
from shapely.geometry import box

from doubletopt.config import DEFAULT_MATRIX, RunConfig
from doubletopt.field import GroundwaterField
from doubletopt.geometry import BlockGeometry, PrepConfig
from doubletopt.model import ScenarioConfig
from doubletopt.scenarios import FAILED, OK, BlockRecord, aggregate, run_matrix, run_scenario
from doubletopt.synthetic import make_city


def test_aggregate_three_blocks():
    recs = [BlockRecord("a", OK, 3, (10.0, 5.0)), BlockRecord("b", OK, 0, ()), BlockRecord("c", OK, 2, (7.0,))]
    r = aggregate(1.0, 2.0, recs)
    assert (r.total_doublets, r.blocks_with, r.blocks_without) == (3, 2, 1)
    assert r.total_rate_lps == 22.0 and r.max_block_rate_lps == 15.0
    assert r.mean_doublet_rate_lps == pytest.approx(22 / 3)
    assert r.max_doublets_per_block == 2
    assert r.avg_max_doublet_rate_lps == pytest.approx(8.5)
    # block b had no candidate lines, so it does not dilute the per-block means
    assert r.mean_block_rate_lps == pytest.approx(11.0)
    assert r.mean_doublets_per_block == pytest.approx(1.5)


def test_aggregate_counts_analysed_blocks_without_doublets():
    recs = [BlockRecord("a", OK, 3, (10.0, 5.0)), BlockRecord("b", OK, 4, ()), BlockRecord("c", OK, 2, (7.0,))]
    assert aggregate(1.0, 2.0, recs).mean_block_rate_lps == pytest.approx(22 / 3)


def test_aggregate_skips_failed_and_empty():
    r = aggregate(1.0, 2.0, [BlockRecord("x", FAILED, 0, ())])
    assert r.total_doublets == 0 and r.blocks_with + r.blocks_without == 0
    empty = aggregate(5.0, 3.0, [])
    assert empty.total_rate_lps == 0.0 and empty.mean_block_rate_lps == 0.0


@pytest.fixture(scope="module")
def small_city():
    return make_city(6, seed=3)


@pytest.fixture(scope="module")
def matrix_runs(small_city):
    blocks, field_ = small_city
    return run_matrix(blocks, field_, RunConfig().scenario_configs(), PrepConfig())


def test_matrix_has_six_reports(matrix_runs):
    assert [(r.report.q_min_lps, r.report.r_delta) for r in matrix_runs] == list(DEFAULT_MATRIX)
    assert all(not r.failed for r in matrix_runs)


def test_single_scenario_matches_matrix(small_city, matrix_runs):
    blocks, field_ = small_city
    outcomes, report = run_scenario(blocks, field_, matrix_runs[0].scenario, PrepConfig())
    assert report == matrix_runs[0].report
    assert [o.solution for o in outcomes] == [o.solution for o in matrix_runs[0].outcomes]


def test_q_min_shrinks_blocks_with(matrix_runs):
    by = {(r.report.q_min_lps, r.report.r_delta): r.report for r in matrix_runs}
    for r_delta in (1.5, 2.0, 3.0):
        assert by[(5.0, r_delta)].blocks_with <= by[(1.0, r_delta)].blocks_with
        assert by[(5.0, r_delta)].total_rate_lps <= by[(1.0, r_delta)].total_rate_lps + 1e-9


def test_bad_block_isolated():
    good = BlockGeometry("A", box(0, 0, 30, 25), [])
    far = BlockGeometry("Z", box(5000, 5000, 5030, 5025), [])
    f = GroundwaterField.uniform(2e-3, 10.0, 500.0, 502.0, 2e-3)
    f.max_distance = 500.0
    outcomes, report = run_scenario([far, good], f, ScenarioConfig(1e-3, 2.0), PrepConfig())
    assert [o.block_id for o in outcomes] == ["A", "Z"]
    assert outcomes[0].status == OK
    assert outcomes[1].status == FAILED and "FieldUnavailable" in outcomes[1].error
    assert report.blocks_with + report.blocks_without == 1


def test_uniform_block_r_delta_ordering():
    from doubletopt.geometry import prepare_block
    from doubletopt.model import BlockProblem, build_milp
    from doubletopt.solver import solve_milp

    f = GroundwaterField.uniform(K=2e-3, B=10.0, h_n=500.0, h_max=502.0, grad_h=1e-3)
    pb = prepare_block(BlockGeometry("U", box(0, 0, 60, 40), []), f, PrepConfig())
    loose = solve_milp(build_milp(BlockProblem("U", pb.lines, ScenarioConfig(1e-3, 3.0))))
    assert loose.proven_optimal
    tight = solve_milp(build_milp(BlockProblem("U", pb.lines, ScenarioConfig(1e-3, 1.5))))
    assert tight.proven_optimal
    assert loose.q_block <= tight.q_block * (1 + 1e-9)
