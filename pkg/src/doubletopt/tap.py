"""Analytical pumping-rate limits of a well doublet (TAP formulas).

All inputs and outputs are SI. The regression constants are fixed; they are
the result of a fitted parameter study and are not meant to be tuned.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError

DRAWDOWN_COEFF = 0.195
UPCONING_THICKNESS_EXP = 0.798
UPCONING_GRADIENT_COEFF = 29.9
BREAKTHROUGH_COEFF = math.pi / 1.96


@dataclass(frozen=True)
class HydroSample:
    """Groundwater parameters at a point.

    ``v_D`` may be None, in which case Darcy's law ``K * grad_h`` is used.
    ``flow_dir`` is a unit vector (east, north) pointing downstream.
    """

    K: float
    B: float
    h_n: float
    h_max: float
    grad_h: float
    v_D: float | None = None
    flow_dir: tuple[float, float] = (1.0, 0.0)

    def __post_init__(self):
        for name in ("K", "B", "grad_h"):
            val = getattr(self, name)
            if not math.isfinite(val) or val < 0:
                raise ValidationError(f"{name} must be finite and >= 0, got {val}")
        if self.v_D is not None and (not math.isfinite(self.v_D) or self.v_D < 0):
            raise ValidationError(f"v_D must be finite and >= 0, got {self.v_D}")
        if not (math.isfinite(self.h_n) and math.isfinite(self.h_max)):
            raise ValidationError("groundwater levels must be finite")
        norm = math.hypot(*self.flow_dir)
        if abs(norm - 1.0) > 1e-9:
            raise ValidationError(f"flow_dir must be a unit vector, norm={norm}")

    @property
    def darcy_velocity(self) -> float:
        return self.K * self.grad_h if self.v_D is None else self.v_D


@dataclass(frozen=True)
class TapLimits:
    q_d: float
    q_f: float
    alpha: float


def drawdown_limit(s: HydroSample) -> float:
    """Pumping rate at which drawdown reaches one third of the thickness."""
    return DRAWDOWN_COEFF * s.K * s.B**2


def upconing_limit(s: HydroSample) -> float:
    """Injection rate at the flooding threshold; zero if there is no headroom."""
    headroom = max(0.0, s.h_max - s.h_n)
    return (
        headroom
        * s.K
        * s.B**UPCONING_THICKNESS_EXP
        * math.exp(UPCONING_GRADIENT_COEFF * s.grad_h)
    )


def breakthrough_param(s: HydroSample) -> float:
    return BREAKTHROUGH_COEFF * s.darcy_velocity * s.B


def breakthrough_limit(alpha: float, internal_distance: float) -> float:
    if internal_distance < 0:
        raise ValueError("internal_distance must be >= 0")
    return alpha * internal_distance


def tap_limits(s: HydroSample) -> TapLimits:
    return TapLimits(drawdown_limit(s), upconing_limit(s), breakthrough_param(s))
