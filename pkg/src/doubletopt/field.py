"""Point-sampled groundwater parameter field with nearest-neighbour lookup."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import FieldUnavailable, ValidationError
from .tap import HydroSample

COLUMNS = ("K", "B", "h_n", "h_max", "grad_h", "v_D", "flow_azimuth_deg")


def azimuth_to_unit(azimuth_deg: float) -> tuple[float, float]:
    """Compass azimuth (clockwise from north) to an (east, north) unit vector."""
    a = math.radians(azimuth_deg)
    east, north = math.sin(a), math.cos(a)
    # exact zeros on the cardinal directions keep axis-aligned grids exact
    if abs(east) < 1e-15:
        east, north = 0.0, math.copysign(1.0, north)
    elif abs(north) < 1e-15:
        east, north = math.copysign(1.0, east), 0.0
    return (east, north)


@dataclass
class GroundwaterField:
    """Groundwater samples at scattered points.

    ``values`` has one row per sample and the columns of ``COLUMNS``; a NaN
    in the ``v_D`` column means the Darcy velocity is derived from K and the
    gradient. ``max_distance`` optionally limits how far a lookup may reach.
    """

    xy: np.ndarray
    values: np.ndarray
    max_distance: float | None = None

    def __post_init__(self):
        self.xy = np.asarray(self.xy, dtype=float).reshape(-1, 2)
        self.values = np.asarray(self.values, dtype=float).reshape(-1, len(COLUMNS))
        if len(self.xy) == 0:
            raise ValidationError("groundwater field needs at least one sample")
        if len(self.xy) != len(self.values):
            raise ValidationError("coordinate and value arrays differ in length")
        for row in range(len(self.xy)):
            # raises ValidationError on a bad record
            self._sample_row(row)
        self._tree = cKDTree(self.xy)

    def __getstate__(self):
        return {"xy": self.xy, "values": self.values, "max_distance": self.max_distance}

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._tree = cKDTree(self.xy)

    def __len__(self):
        return len(self.xy)

    def _sample_row(self, row: int) -> HydroSample:
        K, B, h_n, h_max, grad_h, v_D, az = self.values[row]
        if not np.all(np.isfinite(self.xy[row])):
            raise ValidationError(f"row {row}: coordinates must be finite")
        try:
            return HydroSample(
                K=float(K),
                B=float(B),
                h_n=float(h_n),
                h_max=float(h_max),
                grad_h=float(grad_h),
                v_D=None if math.isnan(v_D) else float(v_D),
                flow_dir=azimuth_to_unit(float(az)),
            )
        except ValidationError as exc:
            raise ValidationError(f"row {row}: {exc}") from None

    def nearest_index(self, x: float, y: float) -> int:
        dist, idx = self._tree.query([x, y])
        if self.max_distance is not None and dist > self.max_distance:
            raise FieldUnavailable(
                f"no groundwater data within {self.max_distance} m of ({x:.3f}, {y:.3f})"
            )
        return int(idx)

    def sample(self, x: float, y: float) -> HydroSample:
        return self._sample_row(self.nearest_index(x, y))

    def sample_many(self, xy: np.ndarray) -> list[HydroSample]:
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        if len(xy) == 0:
            return []
        dist, idx = self._tree.query(xy)
        if self.max_distance is not None and np.any(dist > self.max_distance):
            raise FieldUnavailable(f"no groundwater data within {self.max_distance} m")
        return [self._sample_row(int(i)) for i in idx]

    @classmethod
    def uniform(cls, K, B, h_n, h_max, grad_h, flow_azimuth_deg=90.0, v_D=None, at=(0.0, 0.0)):
        """Single-sample field that returns the same parameters everywhere."""
        vd = math.nan if v_D is None else v_D
        return cls(np.array([at]), np.array([[K, B, h_n, h_max, grad_h, vd, flow_azimuth_deg]]))
