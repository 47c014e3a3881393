"""Unit tags and conversions.

Everything inside the package is SI (m, s, m3/s). Litres per second only
appear at the I/O boundary.
"""
from typing import NewType

Metres = NewType("Metres", float)
RateSI = NewType("RateSI", float)  # m3/s
RateLps = NewType("RateLps", float)  # l/s
Diffusivity = NewType("Diffusivity", float)  # m2/s, breakthrough parameter

LPS_PER_M3S = 1000.0


def to_lps(rate: float) -> RateLps:
    return RateLps(rate * LPS_PER_M3S)


def from_lps(rate: float) -> RateSI:
    return RateSI(rate / LPS_PER_M3S)
