"""Simulator for three-qubit adiabatic quantum teleportation."""

__version__ = "0.1.0"

from .errors import ConsistencyError, DomainError, UnconvergedError
from .model import (
    HEISENBERG,
    XX,
    CouplingModel,
    ScheduleKind,
    SimulationConfig,
    mixing_angle,
    schedule_eval,
)

__all__ = [
    "ConsistencyError",
    "CouplingModel",
    "DomainError",
    "HEISENBERG",
    "ScheduleKind",
    "SimulationConfig",
    "UnconvergedError",
    "XX",
    "mixing_angle",
    "schedule_eval",
]
