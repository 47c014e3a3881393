"""Candidate well placement inside a city block.

Wells sit on a square lattice whose first axis follows the groundwater flow
at the block centroid. Lattice rows parallel to the flow become doublet
lines; each line can host at most one extraction/injection pair.
"""
from __future__ import annotations

import logging
import math
import statistics
from dataclasses import dataclass, field

import numpy as np
import shapely
from shapely.geometry import MultiPolygon, Polygon
from shapely.ops import unary_union

from .errors import InvalidGeometry
from .field import GroundwaterField
from .tap import TapLimits, tap_limits

log = logging.getLogger(__name__)

# membership slack for lattice nodes lying exactly on a boundary
EDGE_TOL = 1e-7


@dataclass
class BlockGeometry:
    block_id: str
    boundary: Polygon | MultiPolygon
    buildings: list[Polygon] = field(default_factory=list)

    def __post_init__(self):
        if self.boundary.is_empty or self.boundary.area <= 0:
            raise InvalidGeometry(f"block {self.block_id}: boundary has no area")
        coords = shapely.get_coordinates(self.boundary)
        if not np.all(np.isfinite(coords)):
            raise InvalidGeometry(f"block {self.block_id}: non-finite coordinates")
        if not self.boundary.is_valid:
            raise InvalidGeometry(
                f"block {self.block_id}: {shapely.is_valid_reason(self.boundary)}"
            )
        for b in self.buildings:
            if not np.all(np.isfinite(shapely.get_coordinates(b))):
                raise InvalidGeometry(f"block {self.block_id}: non-finite building coordinates")


@dataclass(frozen=True)
class PrepConfig:
    buffer_m: float = 3.0
    initial_spacing: float = 5.0
    spacing_step: float = 2.5
    max_wells: int = 100
    min_well_rate: float = 1e-3  # m3/s

    def __post_init__(self):
        if self.buffer_m < 0:
            raise ValueError("buffer_m must be >= 0")
        if self.initial_spacing <= 0 or self.spacing_step <= 0:
            raise ValueError("grid spacing and step must be positive")
        if self.max_wells < 1:
            raise ValueError("max_wells must be >= 1")


@dataclass(frozen=True)
class WellCandidate:
    well_id: int
    x: float
    y: float
    s: float
    t: float
    limits: TapLimits


@dataclass(frozen=True)
class DoubletLine:
    line_id: int
    t: float
    wells: tuple[WellCandidate, ...]

    @property
    def chi(self) -> float:
        return self.wells[-1].s - self.wells[0].s

    @property
    def alpha_med(self) -> float:
        return statistics.median(w.limits.alpha for w in self.wells)


@dataclass(frozen=True)
class PreparedBlock:
    """Outcome of the adaptive grid loop for one block."""

    block_id: str
    flow_dir: tuple[float, float]
    spacing: float
    lines: tuple[DoubletLine, ...]

    @property
    def n_wells(self) -> int:
        return sum(len(line.wells) for line in self.lines)


def to_flow_frame(x, y, flow_dir):
    """Rotate world coordinates into (along-flow s, cross-flow t)."""
    ux, uy = flow_dir
    return x * ux + y * uy, -x * uy + y * ux


def from_flow_frame(s, t, flow_dir):
    ux, uy = flow_dir
    return s * ux - t * uy, s * uy + t * ux


def feasible_area(g: BlockGeometry, buffer_m: float):
    """Block polygon minus every building dilated by ``buffer_m``."""
    if buffer_m < 0:
        raise ValueError("buffer_m must be >= 0")
    if not g.buildings:
        return g.boundary
    obstacles = unary_union([b.buffer(buffer_m) if buffer_m > 0 else b for b in g.buildings])
    area = g.boundary.difference(obstacles)
    if not area.is_valid:
        area = shapely.remove_repeated_points(area)
        if not area.is_valid:
            raise InvalidGeometry(
                f"block {g.block_id}: {shapely.is_valid_reason(area)}"
            )
    return area


def grid_anchor(area, flow_dir) -> tuple[float, float]:
    """Minimum corner of the area's bounding box in the flow frame, in world coordinates."""
    coords = shapely.get_coordinates(area)
    s, t = to_flow_frame(coords[:, 0], coords[:, 1], flow_dir)
    return from_flow_frame(float(s.min()), float(t.min()), flow_dir)


def _lattice(area, flow_dir, spacing, anchor):
    """Lattice nodes covered by ``area``: arrays (i, j, s, t, x, y) ordered by (t, s)."""
    empty = tuple(np.empty(0, dtype=int) for _ in range(2)) + tuple(
        np.empty(0) for _ in range(4)
    )
    if area.is_empty:
        return empty
    coords = shapely.get_coordinates(area)
    s_all, t_all = to_flow_frame(coords[:, 0], coords[:, 1], flow_dir)
    s0, t0 = to_flow_frame(anchor[0], anchor[1], flow_dir)
    i_lo = math.floor((s_all.min() - s0) / spacing - 1e-9)
    i_hi = math.ceil((s_all.max() - s0) / spacing + 1e-9)
    j_lo = math.floor((t_all.min() - t0) / spacing - 1e-9)
    j_hi = math.ceil((t_all.max() - t0) / spacing + 1e-9)
    jj, ii = np.meshgrid(np.arange(j_lo, j_hi + 1), np.arange(i_lo, i_hi + 1), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    s = s0 + ii * spacing
    t = t0 + jj * spacing
    x, y = from_flow_frame(s, t, flow_dir)
    shapely.prepare(area)
    inside = shapely.dwithin(area, shapely.points(x, y), EDGE_TOL)
    return ii[inside], jj[inside], s[inside], t[inside], x[inside], y[inside]


def generate_grid(area, flow_dir, spacing: float, anchor=None) -> list[tuple[float, float]]:
    """Lattice nodes inside ``area`` with one axis along ``flow_dir``.

    The anchor defaults to :func:`grid_anchor`. Nodes on the area boundary
    count as inside. Output is ordered by cross-flow then along-flow position.
    """
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    if area.is_empty:
        return []
    if anchor is None:
        anchor = grid_anchor(area, flow_dir)
    *_, x, y = _lattice(area, flow_dir, spacing, anchor)
    return list(zip(x.tolist(), y.tolist()))


def _clear_of_buildings(x, y, buildings, buffer_m):
    keep = np.ones(len(x), dtype=bool)
    if not buildings or len(x) == 0:
        return keep
    pts = shapely.points(x, y)
    for b in buildings:
        keep &= shapely.distance(b, pts) >= buffer_m - EDGE_TOL
    return keep


def candidates_at_spacing(g, area, flow_dir, spacing, field_: GroundwaterField, cfg: PrepConfig):
    """Filtered, line-grouped candidates for one fixed grid spacing."""
    if area.is_empty:
        return ()
    anchor = grid_anchor(area, flow_dir)
    ii, jj, s, t, x, y = _lattice(area, flow_dir, spacing, anchor)
    keep = _clear_of_buildings(x, y, g.buildings, cfg.buffer_m)
    ii, jj, s, t, x, y = ii[keep], jj[keep], s[keep], t[keep], x[keep], y[keep]
    samples = field_.sample_many(np.column_stack([x, y]))

    rows: dict[int, list] = {}
    for n, hs in enumerate(samples):
        lim = tap_limits(hs)
        if lim.q_d < cfg.min_well_rate or lim.q_f < cfg.min_well_rate:
            continue
        rows.setdefault(int(jj[n]), []).append((float(s[n]), float(t[n]), float(x[n]), float(y[n]), lim))

    lines = []
    well_id = 0
    for j in sorted(rows):
        members = sorted(rows[j], key=lambda r: r[0])
        if len(members) < 2:
            continue
        wells = []
        for s_, t_, x_, y_, lim in members:
            wells.append(WellCandidate(well_id, x_, y_, s_, t_, lim))
            well_id += 1
        lines.append(DoubletLine(len(lines), members[0][1], tuple(wells)))
    return tuple(lines)


def prepare_block(g: BlockGeometry, field_: GroundwaterField, cfg: PrepConfig) -> PreparedBlock:
    """Run the adaptive spacing loop until at most ``cfg.max_wells`` candidates remain."""
    c = g.boundary.centroid
    flow_dir = field_.sample(c.x, c.y).flow_dir
    area = feasible_area(g, cfg.buffer_m)
    minx, miny, maxx, maxy = g.boundary.bounds
    diameter = math.hypot(maxx - minx, maxy - miny)

    step = 0
    while True:
        spacing = cfg.initial_spacing + step * cfg.spacing_step
        if spacing > diameter and step > 0:
            log.debug("block %s: spacing %.2f exceeds block diameter", g.block_id, spacing)
            return PreparedBlock(g.block_id, flow_dir, spacing, ())
        lines = candidates_at_spacing(g, area, flow_dir, spacing, field_, cfg)
        n = sum(len(line.wells) for line in lines)
        if n <= cfg.max_wells:
            return PreparedBlock(g.block_id, flow_dir, spacing, lines)
        step += 1


def adaptive_candidates(g: BlockGeometry, field_: GroundwaterField, cfg: PrepConfig) -> list[DoubletLine]:
    return list(prepare_block(g, field_, cfg).lines)
