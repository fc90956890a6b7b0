"""Uniform 2-d cell grid shared by all solvers.

Fields live on arrays of shape (nx, ny), index [i, j] at position
(xc[i], yc[j]); flattening is C-order, so state index i*ny + j.  The
same layout is used for cell-centered values (Burgers, phase field) and
for each staggered velocity component (which just shifts where the
positions sit, not the array shape).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid2D:
    nx: int
    ny: int
    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise ValueError("grid needs nx, ny >= 4")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("domain bounds must be increasing")

    @property
    def hx(self):
        return (self.x1 - self.x0) / self.nx

    @property
    def hy(self):
        return (self.y1 - self.y0) / self.ny

    @property
    def extent(self):
        return (self.x1 - self.x0, self.y1 - self.y0)

    @property
    def xc(self):
        return self.x0 + (np.arange(self.nx) + 0.5) * self.hx

    @property
    def yc(self):
        return self.y0 + (np.arange(self.ny) + 0.5) * self.hy

    def center_mesh(self):
        return np.meshgrid(self.xc, self.yc, indexing="ij")

    def cell_coords(self):
        """(nx*ny, 2) positions matching C-order flattening of fields."""
        x, y = self.center_mesh()
        return np.column_stack([x.ravel(), y.ravel()])

    def cells(self):
        return self.nx * self.ny
