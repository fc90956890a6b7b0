"""Forward solvers for the three SPDE families plus stochastic wrapping."""

from .allen_cahn import ac_energy, ac_initial, ac_step
from .burgers import burgers_initial, burgers_step, mass, step_adaptive
from .grid import Grid2D
from .navier_stokes import (
    NSState,
    divergence,
    kinetic_energy,
    ns_pack,
    ns_step,
    ns_unpack,
    taylor_green_initial,
)
from .stochastic import make_stochastic

__all__ = [
    "Grid2D",
    "make_stochastic",
    "burgers_initial",
    "burgers_step",
    "step_adaptive",
    "mass",
    "NSState",
    "ns_step",
    "ns_pack",
    "ns_unpack",
    "taylor_green_initial",
    "divergence",
    "kinetic_energy",
    "ac_initial",
    "ac_step",
    "ac_energy",
]
