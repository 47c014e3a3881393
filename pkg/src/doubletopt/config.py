"""Run configuration read from an INI-style file.

Example::

    [prep]
    buffer_m = 3
    initial_spacing = 5
    spacing_step = 2.5
    max_wells = 100
    min_well_rate_lps = 1

    [model]
    delta_min = 10

    [scenarios]
    # q_min in l/s : r_delta
    matrix = 1:1.5, 1:2, 1:3, 5:1.5, 5:2, 5:3

    [budget]
    max_nodes = 1000000
    max_time = 60

    [run]
    workers = 1

``DOUBLETOPT_WORKERS`` in the environment overrides ``run.workers``.
"""
from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ValidationError
from .geometry import PrepConfig
from .model import ScenarioConfig
from .solver import Budget
from .units import from_lps, to_lps

DEFAULT_MATRIX = ((1.0, 1.5), (1.0, 2.0), (1.0, 3.0), (5.0, 1.5), (5.0, 2.0), (5.0, 3.0))


@dataclass
class RunConfig:
    prep: PrepConfig = field(default_factory=PrepConfig)
    scenarios: tuple[tuple[float, float], ...] = DEFAULT_MATRIX  # (q_min l/s, r_delta)
    delta_min: float = 10.0
    budget: Budget = field(default_factory=Budget)
    workers: int = 1

    def scenario_configs(self) -> list[ScenarioConfig]:
        return [
            ScenarioConfig(from_lps(q), r, self.delta_min, self.prep.min_well_rate)
            for q, r in self.scenarios
        ]

    def to_ini(self) -> str:
        p = self.prep
        pairs = ", ".join(f"{q:g}:{r:g}" for q, r in self.scenarios)
        return (
            "[prep]\n"
            f"buffer_m = {p.buffer_m:g}\n"
            f"initial_spacing = {p.initial_spacing:g}\n"
            f"spacing_step = {p.spacing_step:g}\n"
            f"max_wells = {p.max_wells}\n"
            f"min_well_rate_lps = {to_lps(p.min_well_rate):g}\n\n"
            "[model]\n"
            f"delta_min = {self.delta_min:g}\n\n"
            "[scenarios]\n"
            f"matrix = {pairs}\n\n"
            "[budget]\n"
            f"max_nodes = {self.budget.max_nodes}\n"
            f"max_time = {self.budget.max_time:g}\n"
        )


def parse_scenario(text: str) -> tuple[float, float]:
    """``"1,1.5"`` or ``"1:1.5"`` -> (q_min l/s, r_delta)."""
    parts = text.replace(":", ",").split(",")
    if len(parts) != 2:
        raise ValidationError(f"scenario must be 'q_min,r_delta', got {text!r}")
    try:
        q, r = float(parts[0]), float(parts[1])
    except ValueError:
        raise ValidationError(f"scenario must be numeric, got {text!r}") from None
    if q <= 0 or r < 1:
        raise ValidationError(f"scenario needs q_min > 0 and r_delta >= 1, got {text!r}")
    return q, r


def _positive(section, key, value):
    if not value > 0:
        raise ValidationError(f"[{section}] {key} must be positive, got {value}")
    return value


def load_config(path: str | Path | None = None, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    cfg = RunConfig()
    if path is not None:
        cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        if not cp.read(path):
            raise ValidationError(f"cannot read config file {path}")
        try:
            if cp.has_section("prep"):
                s = cp["prep"]
                cfg.prep = PrepConfig(
                    buffer_m=s.getfloat("buffer_m", cfg.prep.buffer_m),
                    initial_spacing=_positive("prep", "initial_spacing", s.getfloat("initial_spacing", cfg.prep.initial_spacing)),
                    spacing_step=_positive("prep", "spacing_step", s.getfloat("spacing_step", cfg.prep.spacing_step)),
                    max_wells=int(_positive("prep", "max_wells", s.getint("max_wells", cfg.prep.max_wells))),
                    min_well_rate=from_lps(
                        _positive("prep", "min_well_rate_lps", s.getfloat("min_well_rate_lps", to_lps(cfg.prep.min_well_rate)))
                    ),
                )
            if cp.has_section("model"):
                cfg.delta_min = _positive("model", "delta_min", cp["model"].getfloat("delta_min", cfg.delta_min))
            if cp.has_option("scenarios", "matrix"):
                items = [t.strip() for t in cp["scenarios"]["matrix"].split(",") if t.strip()]
                cfg.scenarios = tuple(parse_scenario(t) for t in items)
            if cp.has_section("budget"):
                b = cp["budget"]
                cfg.budget = Budget(
                    max_nodes=int(_positive("budget", "max_nodes", b.getint("max_nodes", cfg.budget.max_nodes))),
                    max_time=_positive("budget", "max_time", b.getfloat("max_time", cfg.budget.max_time)),
                )
            if cp.has_section("run"):
                cfg.workers = int(_positive("run", "workers", cp["run"].getint("workers", cfg.workers)))
        except ValueError as exc:
            raise ValidationError(f"{path}: {exc}") from None
    if environ.get("DOUBLETOPT_WORKERS"):
        try:
            cfg.workers = int(_positive("env", "DOUBLETOPT_WORKERS", int(environ["DOUBLETOPT_WORKERS"])))
        except ValueError:
            raise ValidationError("DOUBLETOPT_WORKERS must be a positive integer") from None
    return cfg
