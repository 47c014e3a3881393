"""Deterministic synthetic city used by the test-suite and the demo CLI verb."""
from __future__ import annotations

import math

import numpy as np
from shapely import affinity
from shapely.geometry import box

from .field import GroundwaterField
from .geometry import BlockGeometry, DoubletLine, WellCandidate
from .model import BlockProblem, ScenarioConfig
from .tap import HydroSample, tap_limits


# projected metric coordinates, far from the lon/lat range
ORIGIN = (691000.0, 5334000.0)


def make_field(
    extent: tuple[float, float], seed: int = 0, step: float = 20.0, origin: tuple[float, float] = ORIGIN
) -> GroundwaterField:
    """Smoothly varying groundwater parameters on a regular sample grid."""
    rng = np.random.default_rng(seed)
    w, h = extent
    xs = np.arange(0.0, w + step, step)
    ys = np.arange(0.0, h + step, step)
    gx, gy = np.meshgrid(xs, ys)
    gx, gy = gx.ravel(), gy.ravel()
    ph = rng.uniform(0, 2 * math.pi, size=5)
    u = gx / max(w, 1.0)
    v = gy / max(h, 1.0)
    K = 10 ** (-2.3 + 0.4 * np.sin(2 * math.pi * u + ph[0]) * np.cos(math.pi * v + ph[1]))
    B = 9.0 + 6.0 * np.sin(math.pi * (u + v) + ph[2])
    headroom = 1.5 + 1.2 * np.cos(2 * math.pi * v + ph[3])
    grad = 3e-3 + 1.5e-3 * np.sin(math.pi * u + ph[4])
    az = 70.0 + 25.0 * np.sin(math.pi * u) * np.cos(math.pi * v)
    h_n = np.full_like(gx, 510.0)
    values = np.column_stack([K, B, h_n, h_n + headroom, grad, np.full_like(gx, np.nan), az])
    return GroundwaterField(np.column_stack([gx + origin[0], gy + origin[1]]), values)


def make_city(n_blocks: int = 100, seed: int = 0, origin: tuple[float, float] = ORIGIN):
    """Rectangular blocks (some rotated) with up to two buildings each.

    Returns ``(blocks, field)``. Block ids are zero-padded so that string
    order equals generation order.
    """
    rng = np.random.default_rng(seed)
    cols = max(1, math.ceil(math.sqrt(n_blocks)))
    pitch = 50.0
    blocks = []
    for n in range(n_blocks):
        row, col = divmod(n, cols)
        x0, y0 = origin[0] + col * pitch, origin[1] + row * pitch
        w = rng.uniform(22.0, 40.0)
        h = rng.uniform(18.0, 34.0)
        boundary = box(x0, y0, x0 + w, y0 + h)
        buildings = []
        for _ in range(rng.integers(0, 3)):
            bw, bh = rng.uniform(5.0, 12.0, size=2)
            bx = rng.uniform(x0 - 2.0, x0 + w - bw + 2.0)
            by = rng.uniform(y0 - 2.0, y0 + h - bh + 2.0)
            buildings.append(box(bx, by, bx + bw, by + bh))
        angle = float(rng.choice([0.0, 0.0, 15.0, -20.0]))
        if angle:
            c = boundary.centroid
            boundary = affinity.rotate(boundary, angle, origin=c)
            buildings = [affinity.rotate(b, angle, origin=c) for b in buildings]
        blocks.append(BlockGeometry(f"B{n:04d}", boundary, buildings))
    extent = (cols * pitch, math.ceil(n_blocks / cols) * pitch)
    return blocks, make_field(extent, seed=seed + 1, origin=origin)


def random_problem(rng: np.random.Generator, max_lines: int = 3, max_wells: int = 4) -> BlockProblem:
    """Small random block with flow along +x and lines on a 5 m cross-flow grid.

    Well parameters are drawn independently per well: K in [1e-4, 5e-3] m/s,
    B in [2, 20] m, headroom in [0, 3] m, gradient in [1e-4, 5e-3].
    """
    n_lines = int(rng.integers(1, max_lines + 1))
    ts = np.sort(rng.choice(np.arange(0.0, 60.0, 5.0), n_lines, replace=False))
    lines = []
    well_id = 0
    for k, t in enumerate(ts):
        n_wells = int(rng.integers(2, max_wells + 1))
        spacing = float(rng.choice([5.0, 7.5, 10.0]))
        wells = []
        for n in range(n_wells):
            hs = HydroSample(
                K=rng.uniform(1e-4, 5e-3),
                B=rng.uniform(2.0, 20.0),
                h_n=0.0,
                h_max=rng.uniform(0.0, 3.0),
                grad_h=rng.uniform(1e-4, 5e-3),
            )
            s = n * spacing
            wells.append(WellCandidate(well_id, s, float(t), s, float(t), tap_limits(hs)))
            well_id += 1
        lines.append(DoubletLine(k, float(t), tuple(wells)))
    scenario = ScenarioConfig(float(rng.choice([1e-3, 5e-3])), float(rng.choice([1.5, 2.0, 3.0])))
    return BlockProblem("R", tuple(lines), scenario)
