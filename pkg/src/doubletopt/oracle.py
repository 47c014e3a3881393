"""Brute-force optimum for small block problems.

Used only to cross-check the branch-and-bound solver. It enumerates every
combination of per-line well pairs, so it reads the raw line data itself
and never touches the assembled model or the in-house simplex; the residual
rate allocation goes to scipy's HiGHS.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from scipy.optimize import linprog

from .errors import TooLarge
from .model import BlockProblem

MAX_ENUMERATION = 10_000_000


@dataclass(frozen=True)
class EnumerationBound:
    max_lines: int = 3
    max_wells_per_line: int = 4


def _line_options(line, sc):
    """Feasible (ext, inj, upper rate) choices of one line, installed only."""
    q_max = min(max(w.limits.q_d for w in line.wells), max(w.limits.q_f for w in line.wells))
    opts = []
    for ext in line.wells:
        for inj in line.wells:
            if not inj.s > ext.s:
                continue
            dist = math.hypot(inj.x - ext.x, inj.y - ext.y)
            if dist < sc.delta_min:
                continue
            cap = min(
                q_max,
                ext.limits.q_d,
                inj.limits.q_f,
                0.5 * (ext.limits.alpha + inj.limits.alpha) * dist,
            )
            if cap >= sc.q_min:
                opts.append((ext.well_id, inj.well_id, cap))
    return opts


def _median(vals):
    v = sorted(vals)
    n = len(v)
    return v[n // 2] if n % 2 else 0.5 * (v[n // 2 - 1] + v[n // 2])


def brute_force_optimum(p: BlockProblem, bound: EnumerationBound | None = None):
    """Return ``(objective, assignment)``; assignment maps line_id -> (ext, inj, q)."""
    bound = bound or EnumerationBound()
    sc = p.scenario
    lines = p.lines
    if len(lines) > bound.max_lines or any(len(l.wells) > bound.max_wells_per_line for l in lines):
        raise TooLarge("instance exceeds the enumeration bound")
    size = 1
    for line in lines:
        n = len(line.wells)
        size *= 1 + n * (n - 1) // 2
    if size > MAX_ENUMERATION:
        raise TooLarge(f"enumeration size {size} exceeds {MAX_ENUMERATION}")

    t = [line.t for line in lines]
    chi = [line.wells[-1].s - line.wells[0].s for line in lines]
    alpha = [_median(w.limits.alpha for w in line.wells) for line in lines]
    n = len(lines)
    close = {}
    for k in range(n):
        for q in range(k + 1, n):
            dist = abs(t[k] - t[q])
            close[k, q] = (
                dist < sc.r_delta * sc.delta_min,
                dist < sc.r_delta * (chi[k] + chi[q]) / 2.0,
                dist,
            )
    no_alpha = {k for (a, b), (_, fp, _) in close.items() if fp for k in (a, b) if alpha[k] <= 0}

    options = []
    for k, line in enumerate(lines):
        opts = [] if k in no_alpha else _line_options(line, sc)
        options.append([None] + opts)

    best = 0.0
    best_assign: dict = {}
    for combo in itertools.product(*options):
        on = [k for k in range(n) if combo[k] is not None]
        if not on:
            continue
        if any(close[a, b][0] for a, b in itertools.combinations(on, 2)):
            continue
        caps = [combo[k][2] for k in on]
        if sum(caps) <= best:
            continue
        couplings = [(a, b) for a, b in itertools.combinations(on, 2) if close[a, b][1]]
        if not couplings:
            value, rates = sum(caps), caps
        else:
            pos = {k: i for i, k in enumerate(on)}
            A, rhs = [], []
            for a, b in couplings:
                row = [0.0] * len(on)
                row[pos[a]] = 1.0 / alpha[a]
                row[pos[b]] = 1.0 / alpha[b]
                A.append(row)
                rhs.append(2.0 / sc.r_delta * close[a, b][2])
            res = linprog(
                [-1.0] * len(on),
                A_ub=A,
                b_ub=rhs,
                bounds=[(sc.q_min, cap) for cap in caps],
                method="highs",
            )
            if res.status != 0:
                continue
            value, rates = -res.fun, list(res.x)
        if value > best:
            best = value
            best_assign = {
                lines[k].line_id: (combo[k][0], combo[k][1], rates[i]) for i, k in enumerate(on)
            }
    return best, best_assign
