"""Mixed-integer model of one block: which doublets to install, where, and how hard to pump.

Variable layout (all indices into one vector)::

    d[k]      one binary per line        -- doublet installed
    q[k]      one continuous per line    -- pumping rate, m3/s
    ext[w]    one binary per well        -- well is the extraction well
    inj[w]    one binary per well        -- well is the injection well

The objective maximises the summed pumping rate.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np

from .errors import DegenerateLine
from .geometry import DoubletLine, WellCandidate

INSTANCE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ScenarioConfig:
    q_min: float  # m3/s
    r_delta: float
    delta_min: float = 10.0
    min_well_rate: float = 1e-3

    def __post_init__(self):
        if not self.q_min > 0:
            raise ValueError("q_min must be > 0")
        if not self.r_delta >= 1:
            raise ValueError("r_delta must be >= 1")
        if not self.delta_min > 0:
            raise ValueError("delta_min must be > 0")


def compute_q_max(line: DoubletLine) -> float:
    """Upper bound on a line's rate: best drawdown limit vs. best upconing limit."""
    return min(
        max(w.limits.q_d for w in line.wells),
        max(w.limits.q_f for w in line.wells),
    )


def well_distance(a: WellCandidate, b: WellCandidate) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def pair_admissible(ext: WellCandidate, inj: WellCandidate, delta_min: float) -> bool:
    """Injection strictly downstream of extraction and far enough away."""
    return inj.s > ext.s and well_distance(ext, inj) >= delta_min


def footprint_triggered(dist: float, chi_k: float, chi_p: float, r_delta: float) -> bool:
    return dist < r_delta * (chi_k + chi_p) / 2.0


def spacing_triggered(dist: float, r_delta: float, delta_min: float) -> bool:
    return dist < r_delta * delta_min


@dataclass
class BlockProblem:
    block_id: str
    lines: tuple[DoubletLine, ...]
    scenario: ScenarioConfig
    q_max: np.ndarray = field(init=False)
    pair_dist: np.ndarray = field(init=False)
    m_param: np.ndarray = field(init=False)

    def __post_init__(self):
        self.lines = tuple(self.lines)
        n = len(self.lines)
        self.q_max = np.array([compute_q_max(line) for line in self.lines], dtype=float)
        t = np.array([line.t for line in self.lines], dtype=float)
        self.pair_dist = np.abs(t[:, None] - t[None, :]) if n else np.zeros((0, 0))
        alpha = np.array([line.alpha_med for line in self.lines], dtype=float)
        self.m_param = np.full((n, n), np.nan)
        for k, p in combinations(range(n), 2):
            if alpha[k] > 0 and alpha[p] > 0:
                m = self.q_max[k] / alpha[k] + self.q_max[p] / alpha[p]
                self.m_param[k, p] = self.m_param[p, k] = m

    @property
    def n_wells(self) -> int:
        return sum(len(line.wells) for line in self.lines)

    def footprint_pairs(self):
        """Line pairs (k, p), k < p, close enough to need a footprint row."""
        r = self.scenario.r_delta
        return [
            (k, p)
            for k, p in combinations(range(len(self.lines)), 2)
            if footprint_triggered(self.pair_dist[k, p], self.lines[k].chi, self.lines[p].chi, r)
        ]

    def spacing_pairs(self):
        sc = self.scenario
        return [
            (k, p)
            for k, p in combinations(range(len(self.lines)), 2)
            if spacing_triggered(self.pair_dist[k, p], sc.r_delta, sc.delta_min)
        ]

    def degenerate_lines(self) -> set[int]:
        """Lines with zero median breakthrough parameter that take part in a footprint row."""
        bad = set()
        for k, p in self.footprint_pairs():
            for line_idx in (k, p):
                if self.lines[line_idx].alpha_med <= 0:
                    bad.add(line_idx)
        return bad


@dataclass(frozen=True)
class Row:
    family: str
    entities: tuple
    cols: tuple[int, ...]
    coefs: tuple[float, ...]
    sense: str  # "L" (<=) or "E" (=)
    rhs: float


@dataclass
class MilpInstance:
    """Maximise ``c @ x`` subject to the rows, bounds and binary restrictions."""

    block_id: str
    names: list[str]
    lb: np.ndarray
    ub: np.ndarray
    binary: np.ndarray
    c: np.ndarray
    rows: list[Row]
    d_idx: list[int]
    q_idx: list[int]
    ext_idx: dict[int, int]
    inj_idx: dict[int, int]
    problem: BlockProblem | None = None

    @property
    def n_vars(self) -> int:
        return len(self.names)

    def _matrix(self, sense):
        rows = [r for r in self.rows if r.sense == sense]
        A = np.zeros((len(rows), self.n_vars))
        b = np.empty(len(rows))
        for n, r in enumerate(rows):
            A[n, list(r.cols)] = r.coefs
            b[n] = r.rhs
        return A, b

    def dense(self):
        """(A_ub, b_ub, A_eq, b_eq) as dense arrays."""
        A_ub, b_ub = self._matrix("L")
        A_eq, b_eq = self._matrix("E")
        return A_ub, b_ub, A_eq, b_eq

    @cached_property
    def stacked(self):
        """All rows as one dense system ``(A, b, is_eq)``; cached."""
        A_ub, b_ub, A_eq, b_eq = self.dense()
        is_eq = np.concatenate([np.zeros(len(b_ub), bool), np.ones(len(b_eq), bool)])
        return np.vstack([A_ub, A_eq]), np.concatenate([b_ub, b_eq]), is_eq

    def family_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for r in self.rows:
            counts[r.family] = counts.get(r.family, 0) + 1
        return counts

    def dump(self) -> str:
        """Canonical plain-text listing; floats at 17 significant digits."""
        g = lambda v: format(float(v), ".17g")  # noqa: E731
        out = [
            f"doubletopt-milp format_version={INSTANCE_FORMAT_VERSION}",
            f"block {self.block_id}",
            f"vars {self.n_vars}",
        ]
        for n, name in enumerate(self.names):
            kind = "B" if self.binary[n] else "C"
            out.append(f"var {n} {name} {kind} {g(self.lb[n])} {g(self.ub[n])} {g(self.c[n])}")
        out.append(f"rows {len(self.rows)}")
        for n, r in enumerate(self.rows):
            ent = ",".join(str(e) for e in r.entities)
            terms = " ".join(f"{c}:{g(v)}" for c, v in zip(r.cols, r.coefs))
            out.append(f"row {n} {r.family} {ent} {r.sense} {g(r.rhs)} {len(r.cols)} {terms}")
        return "\n".join(out) + "\n"


def build_milp(p: BlockProblem) -> MilpInstance:
    sc = p.scenario
    lines = p.lines
    n = len(lines)
    wells = [w for line in lines for w in line.wells]

    names: list[str] = []
    lb: list[float] = []
    ub: list[float] = []
    binary: list[bool] = []

    def add(name, upper, is_bin):
        names.append(name)
        lb.append(0.0)
        ub.append(upper)
        binary.append(is_bin)
        return len(names) - 1

    d_idx = [add(f"d[{line.line_id}]", 1.0, True) for line in lines]
    q_idx = [add(f"q[{line.line_id}]", float(p.q_max[k]), False) for k, line in enumerate(lines)]
    ext_idx = {w.well_id: add(f"ext[{w.well_id}]", 1.0, True) for w in wells}
    inj_idx = {w.well_id: add(f"inj[{w.well_id}]", 1.0, True) for w in wells}

    lb_a = np.array(lb)
    ub_a = np.array(ub)

    degenerate = p.degenerate_lines()
    for k in range(n):
        if p.q_max[k] < sc.q_min or k in degenerate:
            if k in degenerate:
                warnings.warn(
                    f"block {p.block_id} line {lines[k].line_id}: zero median "
                    "breakthrough parameter, doublet disabled",
                    DegenerateLine,
                    stacklevel=2,
                )
            ub_a[d_idx[k]] = 0.0
            ub_a[q_idx[k]] = 0.0

    rows: list[Row] = []
    for k, line in enumerate(lines):
        qm = float(p.q_max[k])
        d, q = d_idx[k], q_idx[k]
        lid = line.line_id
        rows.append(Row("rate_cap", (lid,), (q, d), (1.0, -qm), "L", 0.0))
        rows.append(Row("min_rate", (lid,), (d, q), (sc.q_min, -1.0), "L", 0.0))
        rows.append(
            Row("one_inj", (lid,), tuple(inj_idx[w.well_id] for w in line.wells) + (d,),
                (1.0,) * len(line.wells) + (-1.0,), "E", 0.0)
        )
        rows.append(
            Row("one_ext", (lid,), tuple(ext_idx[w.well_id] for w in line.wells) + (d,),
                (1.0,) * len(line.wells) + (-1.0,), "E", 0.0)
        )
        for w in line.wells:
            rows.append(
                Row("drawdown", (lid, w.well_id), (q, ext_idx[w.well_id]), (1.0, qm - w.limits.q_d), "L", qm)
            )
        for w in line.wells:
            rows.append(
                Row("upconing", (lid, w.well_id), (q, inj_idx[w.well_id]), (1.0, qm - w.limits.q_f), "L", qm)
            )
        forbidden = []
        for ext in line.wells:
            for inj in line.wells:
                if pair_admissible(ext, inj, sc.delta_min):
                    a_ij = 0.5 * (ext.limits.alpha + inj.limits.alpha)
                    rows.append(
                        Row("breakthrough", (lid, ext.well_id, inj.well_id),
                            (q, ext_idx[ext.well_id], inj_idx[inj.well_id]),
                            (1.0, qm, qm), "L", a_ij * well_distance(ext, inj) + 2.0 * qm)
                    )
                else:
                    forbidden.append((ext, inj))
        for ext, inj in forbidden:
            rows.append(
                Row("forbidden_pair", (lid, ext.well_id, inj.well_id),
                    (inj_idx[inj.well_id], ext_idx[ext.well_id]), (1.0, 1.0), "L", 1.0)
            )

    r = sc.r_delta
    for k, pp in p.footprint_pairs():
        if k in degenerate or pp in degenerate:
            continue
        ak, ap = lines[k].alpha_med, lines[pp].alpha_med
        m = float(p.m_param[k, pp])
        rows.append(
            Row("footprint", (lines[k].line_id, lines[pp].line_id),
                (q_idx[k], q_idx[pp], d_idx[k], d_idx[pp]),
                (1.0 / ak, 1.0 / ap, m, m), "L", 2.0 / r * float(p.pair_dist[k, pp]) + 2.0 * m)
        )
    for k, pp in p.spacing_pairs():
        rows.append(
            Row("line_spacing", (lines[k].line_id, lines[pp].line_id), (d_idx[k], d_idx[pp]), (1.0, 1.0), "L", 1.0)
        )

    c = np.zeros(len(names))
    c[q_idx] = 1.0
    return MilpInstance(
        block_id=p.block_id,
        names=names,
        lb=lb_a,
        ub=ub_a,
        binary=np.array(binary, dtype=bool),
        c=c,
        rows=rows,
        d_idx=d_idx,
        q_idx=q_idx,
        ext_idx=ext_idx,
        inj_idx=inj_idx,
        problem=p,
    )
