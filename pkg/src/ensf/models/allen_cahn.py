"""Allen-Cahn dynamics with general (possibly random) mobility.

Cell-centered field on a square with homogeneous Neumann walls.  Time
stepping is the linear stabilized scheme: BDF1 on the first step, BDF2
afterwards, with the interface term eps^2*lap(phi) implicit and the
double-well force F'(phi) = phi^3 - phi explicit at the extrapolated state,
damped by a stabilization shift S >= max F'' on [-1, 1].

Mobility kinds: "m1" is the constant 1; "m2" is max{1 + xi, 0} and "m3" is
max{1 - phi^2 + xi, 0} with xi drawn per node each step.  Nodes where the
mobility vanishes do not move under the chemical potential at all; they are
solved in closed form and the neighbours see them through the right side.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .grid import Grid2D

__all__ = ["ac_initial", "ac_step", "ac_energy"]

_KINDS = ("m1", "m2", "m3")
_STAB = 2.0  # max of F'' = 3 phi^2 - 1 on [-1, 1]
_DEAD = 1e-14


def ac_initial(grid: Grid2D, rng: np.random.Generator) -> np.ndarray:
    """Independent uniform draws on [-0.9, 0.9] per node."""
    return rng.uniform(-0.9, 0.9, size=(grid.nx, grid.ny))


def ac_energy(phi: np.ndarray, grid: Grid2D, eps: float) -> float:
    """Discrete free energy: interface term on interior faces plus the well."""
    dx = np.diff(phi, axis=0) / grid.hx
    dy = np.diff(phi, axis=1) / grid.hy
    grad2 = (dx * dx).sum() + (dy * dy).sum()
    well = (0.25 * (1.0 - phi * phi) ** 2).sum()
    return float(grid.hx * grid.hy * (0.5 * eps * eps * grad2 + well))


def _lap_neumann(phi: np.ndarray, hx: float, hy: float) -> np.ndarray:
    p = np.pad(phi, 1, mode="edge")
    return (p[2:, 1:-1] - 2.0 * phi + p[:-2, 1:-1]) / (hx * hx) + (
        p[1:-1, 2:] - 2.0 * phi + p[1:-1, :-2]
    ) / (hy * hy)


def _mobility(kind, phi_star, noise_scale, rng):
    if kind == "m1":
        if noise_scale:
            raise ValueError("m1 mobility takes no noise; use m2 for a perturbed constant")
        return np.ones_like(phi_star)
    xi = 0.0
    if noise_scale:
        if rng is None:
            raise ValueError("noisy mobility needs an rng")
        xi = noise_scale * rng.standard_normal(phi_star.shape)
    if kind == "m2":
        return np.maximum(1.0 + xi, 0.0)
    return np.maximum(1.0 - phi_star * phi_star + xi, 0.0)


def _solve_direct(rhs: np.ndarray, shift: np.ndarray, coef: float, grid: Grid2D) -> np.ndarray:
    """(shift*I - coef*lap + stab-part baked into shift) x = rhs via DCT."""
    import scipy.fft as sfft

    lx = (2.0 * np.cos(np.pi * np.arange(grid.nx) / grid.nx) - 2.0) / (grid.hx**2)
    ly = (2.0 * np.cos(np.pi * np.arange(grid.ny) / grid.ny) - 2.0) / (grid.hy**2)
    xh = sfft.dctn(rhs, type=2)
    xh /= shift - coef * (lx[:, None] + ly[None, :])
    return sfft.idctn(xh, type=2)


def ac_step(
    phi: np.ndarray,
    phi_prev,
    grid: Grid2D,
    dt: float,
    eps: float = 0.01,
    mobility: str = "m1",
    noise_scale: float = 0.0,
    rng=None,
    stab: float = _STAB,
    solver: str = "auto",
    cg_rtol: float = 1e-12,
    cg_maxiter: int = 400,
) -> np.ndarray:
    """One BDF step; pass phi_prev=None on the first step (BDF1)."""
    if mobility not in _KINDS:
        raise ValueError("mobility must be one of %s, got %r" % (", ".join(_KINDS), mobility))
    if solver not in ("auto", "direct", "cg"):
        raise ValueError("solver must be auto, direct or cg, got %r" % solver)
    if dt <= 0.0:
        raise ValueError("dt must be positive, got %g" % dt)
    phi = np.asarray(phi, dtype=np.float64)
    if phi.shape != (grid.nx, grid.ny):
        raise ValueError("phi shape %r does not match grid" % (phi.shape,))
    if not np.all(np.isfinite(phi)):
        raise ValueError("non-finite phi")
    if phi_prev is None:
        a = 1.0 / dt
        rhs_time = phi / dt
        phi_star = phi
        frozen_val = phi
    else:
        phi_prev = np.asarray(phi_prev, dtype=np.float64)
        if not np.all(np.isfinite(phi_prev)):
            raise ValueError("non-finite phi history")
        a = 1.5 / dt
        rhs_time = (2.0 * phi - 0.5 * phi_prev) / dt
        phi_star = 2.0 * phi - phi_prev
        frozen_val = (4.0 * phi - phi_prev) / 3.0

    m = _mobility(mobility, phi_star, noise_scale, rng)
    fprime = phi_star**3 - phi_star
    rhs = rhs_time + m * (stab * phi_star - fprime)
    coef = eps * eps

    constant_m = float(m.max() - m.min()) == 0.0
    if solver == "direct" and not constant_m:
        raise ValueError("direct solver requires constant mobility")

    if constant_m:
        m0 = float(m.flat[0])
        if m0 <= _DEAD:
            return frozen_val.copy()
        if solver != "cg":
            # a*x + m0*(-coef*lap(x) + stab*x) = rhs, diagonalized by cosines
            return _solve_direct(rhs, np.asarray(a + m0 * stab), m0 * coef, grid)

    live = m > _DEAD
    out = frozen_val.copy()
    if not live.any():
        return out
    # divide the live rows by their mobility so the operator is symmetric
    diag = a / m[live] + stab
    dead_field = np.where(live, 0.0, frozen_val)
    rhs_live = rhs[live] / m[live] + coef * _lap_neumann(dead_field, grid.hx, grid.hy)[live]

    def apply(x):
        full = np.zeros_like(phi)
        full[live] = x
        y = -coef * _lap_neumann(full, grid.hx, grid.hy)
        return y[live] + diag * x

    n_live = int(live.sum())
    op = LinearOperator((n_live, n_live), matvec=apply, dtype=np.float64)
    x, info = cg(op, rhs_live, x0=phi[live], rtol=cg_rtol, maxiter=cg_maxiter)
    if info != 0:
        raise RuntimeError("mobility-weighted interface solve failed: CG status %d" % info)
    out[live] = x
    return out
