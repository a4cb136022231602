"""Fuzzy-PID thrust vector control of a CanSat carrier, tuned by a multi-objective GA."""

from .fuzzy import GainSchedule
from .moga import GaConfig, evolve
from .plant import PlantParams
from .simulation import SimConfig, evaluate, rollout

__all__ = ["GaConfig", "GainSchedule", "PlantParams", "SimConfig", "evaluate", "evolve", "rollout"]
__version__ = "0.1.0"
