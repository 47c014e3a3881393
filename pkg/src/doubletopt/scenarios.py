"""Run the prepare -> build -> solve -> audit pipeline over many blocks and scenarios."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .field import GroundwaterField
from .geometry import BlockGeometry, PrepConfig, PreparedBlock, prepare_block
from .model import BlockProblem, ScenarioConfig, build_milp
from .solver import BlockSolution, Budget, Violation, audit_solution, solve_milp
from .units import to_lps

log = logging.getLogger(__name__)

OK = "ok"
FAILED = "failed"


@dataclass(frozen=True)
class BlockOutcome:
    block_id: str
    status: str
    prepared: PreparedBlock | None = None
    solution: BlockSolution | None = None
    violations: tuple[Violation, ...] = ()
    error: str = ""

    @property
    def n_lines(self) -> int:
        return len(self.prepared.lines) if self.prepared else 0

    @property
    def n_wells(self) -> int:
        return self.prepared.n_wells if self.prepared else 0

    def rates_lps(self) -> tuple[float, ...]:
        """Installed doublet rates in l/s, rounded to the serialised precision."""
        if self.solution is None:
            return ()
        return tuple(round(to_lps(d.q), 3) for d in self.solution.installed)


@dataclass(frozen=True)
class BlockRecord:
    """What the aggregation needs from one block; also what the block table stores."""

    block_id: str
    status: str
    n_lines: int
    rates_lps: tuple[float, ...]


@dataclass(frozen=True)
class ScenarioReport:
    q_min_lps: float
    r_delta: float
    total_doublets: int
    max_doublets_per_block: int
    mean_doublets_per_block: float
    avg_max_doublet_rate_lps: float
    mean_doublet_rate_lps: float
    blocks_with: int
    blocks_without: int
    total_rate_lps: float
    max_block_rate_lps: float
    mean_block_rate_lps: float


@dataclass
class ScenarioRun:
    scenario: ScenarioConfig
    outcomes: list[BlockOutcome]
    report: ScenarioReport = field(init=False)

    def __post_init__(self):
        self.report = aggregate(
            to_lps(self.scenario.q_min), self.scenario.r_delta, [to_record(o) for o in self.outcomes]
        )

    @property
    def failed(self) -> list[str]:
        return [o.block_id for o in self.outcomes if o.status != OK]


def to_record(o: BlockOutcome) -> BlockRecord:
    return BlockRecord(o.block_id, o.status, o.n_lines, o.rates_lps())


def _mean(total, count):
    return total / count if count else 0.0


def aggregate(q_min_lps: float, r_delta: float, records: list[BlockRecord]) -> ScenarioReport:
    """Summary statistics over the successfully analysed blocks.

    Per-block means (doublets, pumping rate) divide by the blocks that had
    at least one candidate line.
    """
    ok = [r for r in records if r.status == OK]
    with_ = [r for r in ok if r.rates_lps]
    n_candidate_blocks = sum(1 for r in ok if r.n_lines > 0)
    block_rates = [math.fsum(r.rates_lps) for r in ok]
    total_rate = math.fsum(rate for r in ok for rate in r.rates_lps)
    total_doublets = sum(len(r.rates_lps) for r in ok)
    return ScenarioReport(
        q_min_lps=q_min_lps,
        r_delta=r_delta,
        total_doublets=total_doublets,
        max_doublets_per_block=max((len(r.rates_lps) for r in ok), default=0),
        mean_doublets_per_block=_mean(total_doublets, n_candidate_blocks),
        avg_max_doublet_rate_lps=_mean(math.fsum(max(r.rates_lps) for r in with_), len(with_)),
        mean_doublet_rate_lps=_mean(total_rate, total_doublets),
        blocks_with=len(with_),
        blocks_without=len(ok) - len(with_),
        total_rate_lps=total_rate,
        max_block_rate_lps=max(block_rates, default=0.0),
        mean_block_rate_lps=_mean(total_rate, n_candidate_blocks),
    )


def _prepare(args):
    g, field_, prep = args
    try:
        return g.block_id, prepare_block(g, field_, prep), ""
    except Exception as exc:  # one bad block must not sink the run
        log.warning("block %s: preparation failed: %s", g.block_id, exc)
        return g.block_id, None, f"{type(exc).__name__}: {exc}"


def _solve_block(args) -> list[BlockOutcome]:
    block_id, prepared, error, scenarios, budget = args
    out = []
    for sc in scenarios:
        if prepared is None:
            out.append(BlockOutcome(block_id, FAILED, error=error))
            continue
        try:
            problem = BlockProblem(prepared.block_id, prepared.lines, sc)
            if not prepared.lines:
                sol = BlockSolution.empty(prepared.block_id)
            else:
                sol = solve_milp(build_milp(problem), budget)
            violations = tuple(audit_solution(sol, problem))
        except Exception as exc:
            log.warning("block %s: solve failed: %s", prepared.block_id, exc)
            out.append(BlockOutcome(prepared.block_id, FAILED, prepared, error=f"{type(exc).__name__}: {exc}"))
            continue
        if violations:
            msg = "; ".join(str(v) for v in violations[:3])
            log.error("block %s: audit found %d violations: %s", prepared.block_id, len(violations), msg)
            out.append(BlockOutcome(prepared.block_id, FAILED, prepared, sol, violations, f"audit: {msg}"))
        else:
            out.append(BlockOutcome(prepared.block_id, OK, prepared, sol))
    return out


def _map(fn, items, workers):
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def prepare_blocks(blocks: list[BlockGeometry], field_: GroundwaterField, prep: PrepConfig, workers: int = 1):
    """Candidate preparation for every block, ordered by block id.

    Returns a list of ``(block_id, PreparedBlock | None, error message)``.
    """
    ordered = sorted(blocks, key=lambda g: g.block_id)
    return _map(_prepare, [(g, field_, prep) for g in ordered], workers)


def solve_prepared(prepared, scenarios: list[ScenarioConfig], budget: Budget | None = None, workers: int = 1):
    budget = budget or Budget()
    jobs = [(bid, pb, err, list(scenarios), budget) for bid, pb, err in prepared]
    per_block = _map(_solve_block, jobs, workers)
    return [ScenarioRun(sc, [outs[n] for outs in per_block]) for n, sc in enumerate(scenarios)]


def run_matrix(blocks, field_, scenarios, prep: PrepConfig, budget: Budget | None = None, workers: int = 1):
    """Prepare candidates once, then solve every block under every scenario."""
    prepared = prepare_blocks(blocks, field_, prep, workers)
    return solve_prepared(prepared, scenarios, budget, workers)


def run_scenario(blocks, field_, cfg: ScenarioConfig, prep: PrepConfig, budget: Budget | None = None, workers: int = 1):
    """Single-scenario convenience wrapper; returns ``(outcomes, report)``."""
    (run,) = run_matrix(blocks, field_, [cfg], prep, budget, workers)
    return run.outcomes, run.report
