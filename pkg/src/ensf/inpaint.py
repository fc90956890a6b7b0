"""Biharmonic reconstruction of unobserved grid values.

The reconstruction minimizes the summed squared discrete Laplacian over the
free nodes, holding observed nodes fixed.  At boundary nodes the curvature
normal to the wall is dropped (equivalently: ghosts extrapolate linearly),
which keeps every affine and bilinear field exactly in the kernel, so flat
and tilted regions pass through untouched.  The normal equations apply the
resulting 13-point bilaplacian and are solved matrix-free by conjugate
gradients.

densify_observation() is the filtering hook: sparse nonlinear observations
are pulled back through the inverse observation map, inpainted to a dense
field, and re-issued as a dense identity observation whose noise is inflated
on the reconstructed entries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .models.grid import Grid2D
from .observe import Observation, ObservationModel

__all__ = ["PartialField", "biharmonic_inpaint", "densify_observation"]

_TAN_CLIP = np.pi / 2 - 1e-3


@dataclass(frozen=True)
class PartialField:
    values: np.ndarray  # full length-d vector, meaningful on mask only
    mask: np.ndarray
    grid: Grid2D

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=np.intp)
        if mask.size == 0:
            raise ValueError("mask must be nonempty")
        if mask.ndim != 1 or np.unique(mask).size != mask.size:
            raise ValueError("mask must be a 1-D set of distinct indices")
        d = self.grid.nx * self.grid.ny
        if mask.min() < 0 or mask.max() >= d:
            raise ValueError("mask indices out of range for the grid")
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (d,):
            raise ValueError("values must have one entry per grid node")
        if not np.all(np.isfinite(values[mask])):
            raise ValueError("observed values must be finite")
        object.__setattr__(self, "mask", np.sort(mask))
        object.__setattr__(self, "values", values)


def _lap_rows(u: np.ndarray, hx: float, hy: float) -> np.ndarray:
    """Per-node second differences, skipping the wall-normal term at walls."""
    out = np.zeros_like(u)
    out[1:-1, :] += (u[2:, :] - 2.0 * u[1:-1, :] + u[:-2, :]) / (hx * hx)
    out[:, 1:-1] += (u[:, 2:] - 2.0 * u[:, 1:-1] + u[:, :-2]) / (hy * hy)
    return out


def _lap_rows_adjoint(y: np.ndarray, hx: float, hy: float) -> np.ndarray:
    out = np.zeros_like(y)
    yx = y[1:-1, :] / (hx * hx)
    out[2:, :] += yx
    out[:-2, :] += yx
    out[1:-1, :] -= 2.0 * yx
    yy = y[:, 1:-1] / (hy * hy)
    out[:, 2:] += yy
    out[:, :-2] += yy
    out[:, 1:-1] -= 2.0 * yy
    return out


def biharmonic_inpaint(pf: PartialField, rtol: float = 1e-8) -> np.ndarray:
    """Fill the unobserved nodes; observed entries come back bit-exact."""
    g = pf.grid
    d = g.nx * g.ny
    mask = pf.mask
    if mask.size == d:
        return pf.values.copy()
    free = np.setdiff1d(np.arange(d), mask, assume_unique=True)

    shape = (g.nx, g.ny)
    observed = np.zeros(d)
    observed[mask] = pf.values[mask]

    def normal_op(xfree):
        full = np.zeros(d)
        full[free] = xfree
        y = _lap_rows(full.reshape(shape), g.hx, g.hy)
        return _lap_rows_adjoint(y, g.hx, g.hy).ravel()[free]

    yobs = _lap_rows(observed.reshape(shape), g.hx, g.hy)
    rhs = -_lap_rows_adjoint(yobs, g.hx, g.hy).ravel()[free]

    op = LinearOperator((free.size, free.size), matvec=normal_op, dtype=np.float64)
    x0 = np.full(free.size, pf.values[mask].mean())
    maxiter = 10 * d
    x, info = cg(op, rhs, x0=x0, rtol=rtol, maxiter=maxiter)
    if info != 0:
        raise RuntimeError(
            "biharmonic inpainting did not converge within %d CG iterations" % maxiter
        )
    out = pf.values.copy()
    out[free] = x
    return out


def _pull_back(kind: str, y: np.ndarray) -> np.ndarray:
    if kind == "identity":
        return np.asarray(y, dtype=np.float64)
    if kind == "arctan":
        # arctan never reaches +-pi/2; clip so noisy edge values stay sane
        return np.tan(np.clip(y, -_TAN_CLIP, _TAN_CLIP))
    return np.arctan(y)  # tan kind


def densify_observation(
    obs: Observation,
    model: ObservationModel,
    grid: Grid2D,
    inflation: float = 3.0,
):
    """Turn a sparse observation into a dense identity one via inpainting.

    Returns (dense observation, dense identity model, per-component noise std
    vector) where reconstructed entries carry ``inflation`` times the noise.
    """
    d = grid.nx * grid.ny
    pulled = np.zeros(d)
    pulled[model.mask] = _pull_back(model.kind, obs.values)
    pf = PartialField(values=pulled, mask=model.mask, grid=grid)
    dense_values = biharmonic_inpaint(pf)

    noise = np.full(d, float(model.noise_std) * inflation)
    noise[model.mask] = float(model.noise_std)
    dense_model = ObservationModel(kind="identity", mask=np.arange(d), noise_std=model.noise_std)
    dense_obs = Observation(values=dense_values, time_index=obs.time_index)
    return dense_obs, dense_model, noise
