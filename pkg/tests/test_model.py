import math
import warnings

import numpy as np
import pytest
from helpers import coupled_lines, example_line, make_line

from doubletopt.errors import DegenerateLine
from doubletopt.model import (
    BlockProblem,
    ScenarioConfig,
    build_milp,
    compute_q_max,
    footprint_triggered,
    pair_admissible,
)

SC = ScenarioConfig(q_min=1e-3, r_delta=2.0)


@pytest.mark.parametrize(
    "q_d, q_f, expected",
    [((0.010, 0.020), (0.015, 0.008), 0.015), ((0.005, 0.005), (0.005, 0.005), 0.005), ((0.003, 0.004), (0.009, 0.009), 0.004)],
)
def test_q_max(q_d, q_f, expected):
    line = make_line(0, 0.0, [(0.0, q_d[0], q_f[0], 1e-4), (10.0, q_d[1], q_f[1], 1e-4)])
    assert compute_q_max(line) == pytest.approx(expected)


def test_pair_admissibility():
    line = example_line()
    up, down = line.wells
    assert pair_admissible(up, down, 10.0)
    assert not pair_admissible(down, up, 10.0)
    assert not pair_admissible(up, down, 25.0)


def test_footprint_trigger_strict():
    assert footprint_triggered(30.0, 20.0, 20.0, 2.0)
    assert not footprint_triggered(40.0, 20.0, 20.0, 2.0)


def test_row_families_single_line():
    inst = build_milp(BlockProblem("b", (example_line(),), SC))
    counts = inst.family_counts()
    # 2 wells: one admissible pair, three forbidden (two i == j and the reverse)
    assert counts == {"rate_cap": 1, "min_rate": 1, "one_inj": 1, "one_ext": 1, "drawdown": 2, "upconing": 2, "breakthrough": 1, "forbidden_pair": 3}
    assert inst.n_vars == 1 + 1 + 2 + 2
    assert [inst.binary[j] for j in range(inst.n_vars)] == [True, False, True, True, True, True]


def test_admissible_plus_forbidden_cover_all_pairs():
    line = make_line(0, 0.0, [(s, 0.01, 0.01, 1e-4) for s in (0.0, 5.0, 10.0, 15.0, 20.0)])
    inst = build_milp(BlockProblem("b", (line,), SC))
    c = inst.family_counts()
    assert c["breakthrough"] + c["forbidden_pair"] == 25


def test_coupling_rows():
    a, b = coupled_lines()
    p = BlockProblem("b", (a, b), SC)
    assert p.footprint_pairs() == [(0, 1)]
    assert p.spacing_pairs() == []
    assert p.m_param[0, 1] == pytest.approx(2 * 0.02 / 5e-4)
    counts = build_milp(p).family_counts()
    assert counts["footprint"] == 1 and "line_spacing" not in counts

    near = make_line(1, 15.0, [(0.0, 0.02, 0.02, 5e-4), (20.0, 0.02, 0.02, 5e-4)], 2)
    counts = build_milp(BlockProblem("b", (a, near), SC)).family_counts()
    assert counts["line_spacing"] == 1


def test_line_below_q_min_fixed_off():
    line = make_line(0, 0.0, [(0.0, 5e-4, 5e-4, 1e-4), (20.0, 5e-4, 5e-4, 1e-4)])
    inst = build_milp(BlockProblem("b", (line,), SC))
    assert inst.ub[inst.d_idx[0]] == 0.0 and inst.ub[inst.q_idx[0]] == 0.0


def test_degenerate_line_warns_and_is_disabled():
    a, _ = coupled_lines()
    zero = make_line(1, 30.0, [(0.0, 0.02, 0.02, 0.0), (20.0, 0.02, 0.02, 0.0)], 2)
    p = BlockProblem("b", (a, zero), SC)
    assert p.degenerate_lines() == {1}
    with pytest.warns(DegenerateLine):
        inst = build_milp(p)
    assert inst.ub[inst.d_idx[1]] == 0.0
    assert "footprint" not in inst.family_counts()


def test_dump_is_canonical():
    a, b = coupled_lines()
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        one = build_milp(BlockProblem("b", (a, b), SC)).dump()
        two = build_milp(BlockProblem("b", (a, b), SC)).dump()
    assert one == two
    assert one.startswith("doubletopt-milp format_version=1\n")


def test_no_nan_in_matrix():
    a, b = coupled_lines()
    A, rhs, _ = build_milp(BlockProblem("b", (a, b), SC)).stacked
    assert np.all(np.isfinite(A)) and np.all(np.isfinite(rhs))
    assert not math.isnan(BlockProblem("b", (a, b), SC).m_param[0, 1])
