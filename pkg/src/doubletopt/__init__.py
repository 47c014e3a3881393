"""Optimal placement of groundwater heat pump well doublets in urban blocks."""
from .errors import (
    CrsError,
    DegenerateLine,
    DoubletOptError,
    FieldUnavailable,
    Infeasible,
    InvalidGeometry,
    IoError,
    NumericalFailure,
    ParseError,
    TooLarge,
    ValidationError,
)
from .field import GroundwaterField
from .geometry import BlockGeometry, DoubletLine, PrepConfig, PreparedBlock, WellCandidate, prepare_block
from .model import BlockProblem, MilpInstance, ScenarioConfig, build_milp
from .oracle import EnumerationBound, brute_force_optimum
from .scenarios import ScenarioReport, ScenarioRun, run_matrix, run_scenario
from .solver import BlockSolution, Budget, audit_solution, solve_lp, solve_milp
from .tap import HydroSample, TapLimits, breakthrough_limit, breakthrough_param, drawdown_limit, tap_limits, upconing_limit

__all__ = [name for name, obj in list(globals().items()) if not name.startswith("_") and not isinstance(obj, type(errors))]
