"""Gradient-free cooperative level-curve tracking with two agents."""
from ._backend import BACKEND
from .analysis import MonitorParams, RunSummary
from .controller import ControllerParams, FormationFrame
from .field import FieldBounds, FieldModel
from .sim import ExplicitInit, Placement, SimConfig, SimState, Trajectory, run

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ControllerParams",
    "ExplicitInit",
    "FieldBounds",
    "FieldModel",
    "FormationFrame",
    "MonitorParams",
    "Placement",
    "RunSummary",
    "SimConfig",
    "SimState",
    "Trajectory",
    "run",
]
