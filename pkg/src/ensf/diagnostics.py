"""Scalar diagnostics computed against truth or on single fields.

Everything here returns plain floats so run records can serialize them
without ceremony. Field arguments are cell-centered (nx, ny) arrays
unless noted; velocity diagnostics take the staggered state directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .models.allen_cahn import ac_energy
from .models.grid import Grid2D
from .models.navier_stokes import NSState

__all__ = [
    "DiagnosticSeries",
    "ac_energy",
    "kinetic_energy",
    "mass",
    "rmse",
    "sup_norm",
]


def rmse(est: np.ndarray, ref: np.ndarray) -> float:
    est = np.asarray(est, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if est.shape != ref.shape:
        raise ValueError(f"shape mismatch: {est.shape} vs {ref.shape}")
    return float(np.sqrt(np.mean((est - ref) ** 2)))


def mass(field_: np.ndarray, grid: Grid2D) -> float:
    """Cell-sum integral of a centered scalar field."""
    return float(np.asarray(field_, dtype=np.float64).sum() * grid.hx * grid.hy)


def kinetic_energy(state: NSState, grid: Grid2D) -> float:
    """0.5 * integral of |velocity|^2, velocity averaged to cell centers.

    The face-to-center average makes this directly comparable across
    runs regardless of staggering; it differs from the face-based sum
    used internally by the solver by O(h^2).
    """
    u, v = state.u, state.v
    uc = 0.5 * (u + np.roll(u, -1, axis=0))
    if v.shape[1] == u.shape[1] + 1:  # channel: v carries both walls
        vc = 0.5 * (v[:, :-1] + v[:, 1:])
    else:
        vc = 0.5 * (v + np.roll(v, -1, axis=1))
    return float(0.5 * ((uc**2 + vc**2).sum()) * grid.hx * grid.hy)


def sup_norm(field_: np.ndarray) -> float:
    return float(np.abs(np.asarray(field_)).max())


@dataclass(frozen=True)
class DiagnosticSeries:
    """One named scalar tracked over filter times."""

    name: str
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        if times.shape != values.shape or times.ndim != 1:
            raise ValueError(
                f"times and values need equal 1-d length, got {times.shape} and {values.shape}"
            )
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
