"""Ensemble score filtering for state estimation of stochastic PDEs."""

from .schedule import DiffusionSchedule
from .score import Ensemble, estimate_score, log_weights

__version__ = "0.1.0"

__all__ = [
    "DiffusionSchedule",
    "Ensemble",
    "estimate_score",
    "log_weights",
    "__version__",
]
