"""Sequential sharing of bilocal (network) nonlocality with unsharp measurements."""

from .errors import (
    BinetError,
    ConfigError,
    DimensionError,
    NoViolation,
    NormalizationError,
    ParamError,
    ParseError,
    StateError,
    Unreachable,
    ValidationError,
    WrongScenario,
)
from .measurements import JointKind, RoundSpec, bell_basis, ejm_basis
from .protocol import ScenarioConfig, averaged_table, brgp_from_table, simulate, tgb_from_table
from .solver import Family, Scenario, critical_schedule, entanglement_threshold, max_rounds
from .states import Base, SourceSpec

__version__ = "0.1.0"
