"""Exact branch-and-bound for block instances, plus an independent constraint audit."""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import Infeasible
from .model import (
    BlockProblem,
    MilpInstance,
    footprint_triggered,
    pair_admissible,
    spacing_triggered,
    well_distance,
)
from .simplex import FEAS_TOL, INFEASIBLE, OPTIMAL, bounded_simplex

INT_TOL = 1e-6
GAP_TOL = 1e-6
DEFAULT_MAX_NODES = 1_000_000
DEFAULT_MAX_TIME = 60.0


@dataclass(frozen=True)
class LpResult:
    status: str
    objective: float | None
    primal: np.ndarray | None


@dataclass(frozen=True)
class Budget:
    max_nodes: int = DEFAULT_MAX_NODES
    max_time: float = DEFAULT_MAX_TIME


@dataclass(frozen=True)
class InstalledDoublet:
    line_id: int
    ext_well_id: int
    inj_well_id: int
    q: float  # m3/s


@dataclass(frozen=True)
class BlockSolution:
    block_id: str
    installed: tuple[InstalledDoublet, ...]
    proven_optimal: bool
    gap: float
    node_count: int
    solve_time: float = field(default=0.0, compare=False)

    @property
    def q_block(self) -> float:
        return math.fsum(d.q for d in self.installed)

    @property
    def n_doublet(self) -> int:
        return len(self.installed)

    @classmethod
    def empty(cls, block_id: str) -> "BlockSolution":
        return cls(block_id, (), True, 0.0, 0)


def solve_lp(inst: MilpInstance, fixings: dict[int, float] | None = None) -> LpResult:
    """LP relaxation of ``inst`` with some variables fixed.

    Fixed variables are substituted out, rows that can no longer bind are
    dropped, and the remaining columns are scaled to [0, 1] before the
    simplex runs.
    """
    A, b, is_eq = inst.stacked
    lb = inst.lb.copy()
    ub = inst.ub.copy()
    if fixings:
        for j, v in fixings.items():
            lb[j] = ub[j] = v
    if np.any(lb > ub + 1e-12):
        return LpResult(INFEASIBLE, None, None)

    fixed = ub - lb <= 1e-12
    free = np.flatnonzero(~fixed)
    x = lb.copy()
    width = ub[free] - lb[free]

    rhs = b - A @ x
    Af = A[:, free] * width
    pos = np.where(Af > 0, Af, 0.0).sum(axis=1)
    neg = np.where(Af < 0, Af, 0.0).sum(axis=1)
    scale = np.maximum(np.abs(Af).max(axis=1, initial=0.0), np.abs(rhs))
    scale = np.where(scale > 0, scale, 1.0)
    tol = FEAS_TOL * scale

    if np.any(neg > rhs + tol) or np.any(is_eq & (pos < rhs - tol)):
        return LpResult(INFEASIBLE, None, None)
    keep = is_eq | (pos > rhs + tol)
    keep &= np.abs(Af).max(axis=1, initial=0.0) > 0
    if np.any(is_eq & ~keep & (np.abs(rhs) > tol)):
        return LpResult(INFEASIBLE, None, None)

    c_free = inst.c[free] * width
    if len(free):
        rows = np.flatnonzero(keep)
        rs = np.abs(Af[rows]).max(axis=1)
        status, z, _ = bounded_simplex(
            c_free, Af[rows] / rs[:, None], rhs[rows] / rs, is_eq[rows], np.ones(len(free))
        )
        if status != OPTIMAL:
            return LpResult(status, None, None)
        x[free] = lb[free] + z * width
    return LpResult(OPTIMAL, float(inst.c @ x), x)


def _fractional(x: np.ndarray, binaries: np.ndarray) -> tuple[int, float]:
    """Most fractional binary (lowest index on ties) and its distance to an integer."""
    vals = x[binaries]
    dist = np.minimum(vals - np.floor(vals), np.ceil(vals) - vals)
    pos = int(np.argmax(dist))
    return int(binaries[pos]), float(dist[pos])


def _extract(inst: MilpInstance, x: np.ndarray) -> tuple[InstalledDoublet, ...]:
    p = inst.problem
    out = []
    for k, line in enumerate(p.lines):
        if x[inst.d_idx[k]] < 0.5:
            continue
        ext = max(line.wells, key=lambda w: x[inst.ext_idx[w.well_id]])
        inj = max(line.wells, key=lambda w: x[inst.inj_idx[w.well_id]])
        q = float(np.clip(x[inst.q_idx[k]], 0.0, inst.ub[inst.q_idx[k]]))
        out.append(InstalledDoublet(line.line_id, ext.well_id, inj.well_id, q))
    return tuple(out)


def solve_milp(inst: MilpInstance, budget: Budget | None = None, gap_tol: float = GAP_TOL) -> BlockSolution:
    """Branch and bound on the binaries of ``inst``.

    Dives depth-first (up branch first) and backtracks to the open node with
    the best bound. Branches on the most fractional binary.
    """
    budget = budget or Budget()
    start = time.perf_counter()
    binaries = np.flatnonzero(inst.binary)

    def prunable(bound):
        return incumbent is not None and bound - inc_obj <= gap_tol * max(abs(inc_obj), 1e-12)

    incumbent: np.ndarray | None = None
    inc_obj = -math.inf
    heap: list = []
    seq = 0
    nodes = 0
    current: tuple | None = ({}, math.inf)
    out_of_budget = False

    while True:
        if current is None:
            while heap and prunable(-heap[0][0]):
                heapq.heappop(heap)
            if not heap:
                break
            neg_bound, _, fix = heapq.heappop(heap)
            current = (fix, -neg_bound)
        fix, bound = current
        current = None
        if prunable(bound):
            continue
        if nodes >= budget.max_nodes or time.perf_counter() - start > budget.max_time:
            seq += 1
            heapq.heappush(heap, (-bound, seq, fix))
            out_of_budget = True
            break
        nodes += 1

        lp = solve_lp(inst, fix)
        if lp.status != OPTIMAL or prunable(lp.objective):
            continue
        var, dist = _fractional(lp.primal, binaries) if len(binaries) else (-1, 0.0)
        if dist <= INT_TOL:
            rounded = dict(fix)
            rounded.update({int(j): float(round(lp.primal[j])) for j in binaries})
            polished = solve_lp(inst, rounded)
            if polished.status == OPTIMAL:
                if incumbent is None or polished.objective > inc_obj + 1e-15:
                    incumbent, inc_obj = polished.primal, polished.objective
                continue
            if dist == 0.0:
                continue
        up = dict(fix)
        up[var] = 1.0
        down = dict(fix)
        down[var] = 0.0
        seq += 1
        heapq.heappush(heap, (-lp.objective, seq, down))
        current = (up, lp.objective)

    if incumbent is None:
        if out_of_budget:
            return BlockSolution(inst.block_id, (), False, math.inf, nodes, time.perf_counter() - start)
        raise Infeasible(f"block {inst.block_id}: no feasible installation found")

    open_bound = max((-h[0] for h in heap), default=inc_obj)
    gap = max(0.0, open_bound - inc_obj) / max(abs(inc_obj), 1e-12) if heap else 0.0
    return BlockSolution(
        block_id=inst.block_id,
        installed=_extract(inst, incumbent),
        proven_optimal=gap <= gap_tol,
        gap=gap,
        node_count=nodes,
        solve_time=time.perf_counter() - start,
    )


@dataclass(frozen=True)
class Violation:
    family: str
    entities: tuple
    residual: float

    def __str__(self):
        return f"{self.family} {self.entities}: residual {self.residual:.3e}"


def audit_solution(
    sol: BlockSolution, p: BlockProblem, tol: float = 1e-6, rate_resolution: float = 0.0
) -> list[Violation]:
    """Re-check a solution directly against the block data.

    ``rate_resolution`` widens every rate comparison by the rounding step of
    the rates, for solutions read back from files.
    """
    sc = p.scenario
    out: list[Violation] = []
    line_pos = {line.line_id: k for k, line in enumerate(p.lines)}
    chosen: dict[int, InstalledDoublet] = {}

    def check(family, entities, residual, slack=rate_resolution):
        if residual > tol + slack:
            out.append(Violation(family, entities, float(residual)))

    for inst in sol.installed:
        k = line_pos.get(inst.line_id)
        if k is None:
            out.append(Violation("one_pair", (inst.line_id,), 1.0))
            continue
        if k in chosen:
            out.append(Violation("one_pair", (inst.line_id,), 1.0))
            continue
        chosen[k] = inst
        line = p.lines[k]
        wells = {w.well_id: w for w in line.wells}
        ext, inj = wells.get(inst.ext_well_id), wells.get(inst.inj_well_id)
        if ext is None or inj is None:
            out.append(Violation("one_pair", (inst.line_id, inst.ext_well_id, inst.inj_well_id), 1.0))
            continue
        q = inst.q
        lid = inst.line_id
        check("rate_cap", (lid,), q - p.q_max[k])
        check("rate_cap", (lid,), -q)
        check("min_rate", (lid,), sc.q_min - q)
        check("drawdown", (lid, ext.well_id), q - ext.limits.q_d)
        check("upconing", (lid, inj.well_id), q - inj.limits.q_f)
        if ext.well_id == inj.well_id or not pair_admissible(ext, inj, sc.delta_min):
            out.append(Violation("forbidden_pair", (lid, ext.well_id, inj.well_id), 1.0))
        else:
            cap = 0.5 * (ext.limits.alpha + inj.limits.alpha) * well_distance(ext, inj)
            check("breakthrough", (lid, ext.well_id, inj.well_id), q - cap)

    for k in sorted(p.degenerate_lines() & set(chosen)):
        out.append(Violation("footprint", (p.lines[k].line_id,), math.inf))

    installed = sorted(chosen)
    for a in range(len(installed)):
        for b in range(a + 1, len(installed)):
            k, pp = installed[a], installed[b]
            lk, lp = p.lines[k], p.lines[pp]
            dist = float(p.pair_dist[k, pp])
            if spacing_triggered(dist, sc.r_delta, sc.delta_min):
                out.append(Violation("line_spacing", (lk.line_id, lp.line_id), 1.0))
            if footprint_triggered(dist, lk.chi, lp.chi, sc.r_delta):
                ak, ap = lk.alpha_med, lp.alpha_med
                if ak <= 0 or ap <= 0:
                    out.append(Violation("footprint", (lk.line_id, lp.line_id), math.inf))
                    continue
                lhs = chosen[k].q / ak + chosen[pp].q / ap
                check(
                    "footprint",
                    (lk.line_id, lp.line_id),
                    lhs - 2.0 / sc.r_delta * dist,
                    rate_resolution * (1.0 / ak + 1.0 / ap),
                )
    return out
