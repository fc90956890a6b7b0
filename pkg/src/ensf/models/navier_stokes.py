"""Incompressible Navier-Stokes on a MAC staggered grid.

One first-order step = semi-implicit momentum solve (implicit diffusion,
explicit convection scaled by a dynamic multiplier q), pressure projection,
then a scalar update of q from the discrete energy identity.  The multiplier
equals 1 for the exact solution, so its drift doubles as a consistency
diagnostic and gives the filter a component with a known true value.

Boundary conditions: "periodic" (both directions) or "channel" (periodic in
x, no-slip walls at y=0 and y=1).  u lives on x-normal faces, v on y-normal
faces, pressure is cell-centered and never part of the state.

All solves are direct: FFT in x combined with cosine/sine transforms in y
chosen to match each field's wall reflection.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.fft as sfft

from .grid import Grid2D

__all__ = [
    "NSState",
    "ns_step",
    "taylor_green_initial",
    "divergence",
    "kinetic_energy",
    "ns_pack",
    "ns_unpack",
]

_BCS = ("periodic", "channel")


@dataclass(frozen=True)
class NSState:
    u: np.ndarray  # (nx, ny) x-face normal velocity
    v: np.ndarray  # (nx, ny) periodic, (nx, ny+1) channel (rows 0 and ny are walls)
    q: float


def _check_bc(bc: str) -> None:
    if bc not in _BCS:
        raise ValueError("bc must be one of %s, got %r" % (", ".join(_BCS), bc))


def taylor_green_initial(grid: Grid2D) -> NSState:
    """Divergence-free decaying vortex data on the unit periodic box."""
    xf = grid.x0 + np.arange(grid.nx) * grid.hx
    xc = xf + 0.5 * grid.hx
    yf = grid.y0 + np.arange(grid.ny) * grid.hy
    yc = yf + 0.5 * grid.hy
    u = np.sin(2 * np.pi * xf)[:, None] * np.cos(2 * np.pi * yc)[None, :]
    v = -np.cos(2 * np.pi * xc)[:, None] * np.sin(2 * np.pi * yf)[None, :]
    return NSState(u=u, v=v, q=1.0)


def divergence(state: NSState, grid: Grid2D, bc: str = "periodic") -> np.ndarray:
    _check_bc(bc)
    u, v = state.u, state.v
    du = (np.roll(u, -1, axis=0) - u) / grid.hx
    if bc == "periodic":
        dv = (np.roll(v, -1, axis=1) - v) / grid.hy
    else:
        dv = (v[:, 1:] - v[:, :-1]) / grid.hy
    return du + dv


def kinetic_energy(state: NSState, grid: Grid2D) -> float:
    cell = grid.hx * grid.hy
    return float(0.5 * cell * ((state.u**2).sum() + (state.v**2).sum()))


def ns_pack(state: NSState) -> np.ndarray:
    return np.concatenate([state.u.ravel(), state.v.ravel(), [state.q]])


def ns_unpack(vec: np.ndarray, grid: Grid2D, bc: str = "periodic") -> NSState:
    _check_bc(bc)
    nu_ = grid.nx * grid.ny
    nv = grid.nx * (grid.ny + (0 if bc == "periodic" else 1))
    if vec.shape != (nu_ + nv + 1,):
        raise ValueError("state vector has %d entries, expected %d" % (vec.size, nu_ + nv + 1))
    u = vec[:nu_].reshape(grid.nx, grid.ny)
    v = vec[nu_ : nu_ + nv].reshape(grid.nx, -1)
    return NSState(u=u, v=v, q=float(vec[-1]))


def _lam_periodic(n: int, h: float) -> np.ndarray:
    k = np.arange(n // 2 + 1)
    return (2.0 * np.cos(2.0 * np.pi * k / n) - 2.0) / (h * h)


def _lam_dst2(n: int, h: float) -> np.ndarray:
    # anti-mirrored cell-centered field (value 0 on the wall between ghosts)
    m = np.arange(1, n + 1)
    return (2.0 * np.cos(np.pi * m / n) - 2.0) / (h * h)


def _lam_dst1(n_interior: int, h: float) -> np.ndarray:
    m = np.arange(1, n_interior + 1)
    return (2.0 * np.cos(np.pi * m / (n_interior + 1)) - 2.0) / (h * h)


def _lam_dct2(n: int, h: float) -> np.ndarray:
    m = np.arange(n)
    return (2.0 * np.cos(np.pi * m / n) - 2.0) / (h * h)


def _helmholtz_periodic(rhs: np.ndarray, coef: float, grid: Grid2D) -> np.ndarray:
    """Solve (I - coef*Lap) x = rhs with periodic wrap in both directions."""
    lx = _lam_periodic(grid.nx, grid.hx)
    ly = (2.0 * np.cos(2.0 * np.pi * np.arange(grid.ny) / grid.ny) - 2.0) / (grid.hy**2)
    xh = sfft.rfft(rhs, axis=0)
    xh = sfft.fft(xh, axis=1)
    xh /= 1.0 - coef * (lx[:, None] + ly[None, :])
    return sfft.irfft(sfft.ifft(xh, axis=1), axis=0, n=grid.nx)


def _helmholtz_channel_u(rhs: np.ndarray, coef: float, grid: Grid2D) -> np.ndarray:
    lx = _lam_periodic(grid.nx, grid.hx)
    ly = _lam_dst2(grid.ny, grid.hy)
    xh = sfft.dst(sfft.rfft(rhs, axis=0), type=2, axis=1)
    xh /= 1.0 - coef * (lx[:, None] + ly[None, :])
    return sfft.irfft(sfft.idst(xh, type=2, axis=1), axis=0, n=grid.nx)


def _helmholtz_channel_v(rhs: np.ndarray, coef: float, grid: Grid2D) -> np.ndarray:
    # interior y-faces only, homogeneous Dirichlet ends
    lx = _lam_periodic(grid.nx, grid.hx)
    ly = _lam_dst1(grid.ny - 1, grid.hy)
    xh = sfft.dst(sfft.rfft(rhs, axis=0), type=1, axis=1)
    xh /= 1.0 - coef * (lx[:, None] + ly[None, :])
    return sfft.irfft(sfft.idst(xh, type=1, axis=1), axis=0, n=grid.nx)


def _poisson_pressure(rhs: np.ndarray, grid: Grid2D, bc: str) -> np.ndarray:
    """Solve Lap phi = rhs with the projection's own divergence/gradient
    stencils; the free constant is fixed by zeroing the mean mode."""
    lx = _lam_periodic(grid.nx, grid.hx)
    if bc == "periodic":
        ly = (2.0 * np.cos(2.0 * np.pi * np.arange(grid.ny) / grid.ny) - 2.0) / (grid.hy**2)
        xh = sfft.fft(sfft.rfft(rhs, axis=0), axis=1)
        den = lx[:, None] + ly[None, :]
        den[0, 0] = 1.0
        xh /= den
        xh[0, 0] = 0.0
        return sfft.irfft(sfft.ifft(xh, axis=1), axis=0, n=grid.nx)
    ly = _lam_dct2(grid.ny, grid.hy)
    xh = sfft.dct(sfft.rfft(rhs, axis=0), type=2, axis=1)
    den = lx[:, None] + ly[None, :]
    den[0, 0] = 1.0
    xh /= den
    xh[0, 0] = 0.0
    return sfft.irfft(sfft.idct(xh, type=2, axis=1), axis=0, n=grid.nx)


def _convection(u: np.ndarray, v: np.ndarray, grid: Grid2D, bc: str):
    """Divergence-form (u.grad)u on the staggered grid."""
    hx, hy = grid.hx, grid.hy
    uc = 0.5 * (u + np.roll(u, -1, axis=0))
    duu = (uc * uc - np.roll(uc * uc, 1, axis=0)) / hx
    if bc == "periodic":
        ubar = 0.5 * (u + np.roll(u, 1, axis=1))     # corners (x_i, y_j)
        vbar = 0.5 * (v + np.roll(v, 1, axis=0))
        cross = ubar * vbar
        fu = duu + (np.roll(cross, -1, axis=1) - cross) / hy
        vc = 0.5 * (v + np.roll(v, -1, axis=1))
        dvv = (vc * vc - np.roll(vc * vc, 1, axis=1)) / hy
        fv = dvv + (np.roll(cross, -1, axis=0) - cross) / hx
        return fu, fv
    # channel: corner products vanish on the walls with the fluid at rest there
    ubar = 0.5 * (u[:, :-1] + u[:, 1:])              # corners j=1..ny-1
    vbar = 0.5 * (v[:, 1:-1] + np.roll(v[:, 1:-1], 1, axis=0))
    cross = np.zeros((grid.nx, grid.ny + 1))
    cross[:, 1:-1] = ubar * vbar
    fu = duu + (cross[:, 1:] - cross[:, :-1]) / hy
    vc = 0.5 * (v[:, :-1] + v[:, 1:])                # cell centers
    dvv = (vc[:, 1:] * vc[:, 1:] - vc[:, :-1] * vc[:, :-1]) / hy
    duv = (np.roll(cross[:, 1:-1], -1, axis=0) - cross[:, 1:-1]) / hx
    fv = np.zeros_like(v)
    fv[:, 1:-1] = dvv + duv
    return fu, fv


def _inner(au, av, bu, bv, cell):
    return cell * (float(np.vdot(au, bu)) + float(np.vdot(av, bv)))


def ns_step(
    state: NSState,
    grid: Grid2D,
    dt: float,
    nu: float,
    theta: float = 5.0,
    forcing=None,
    bc: str = "periodic",
) -> NSState:
    """Advance one step.  Raises if the projected field is not discretely
    divergence-free to 1e-8, which a healthy direct solve always satisfies."""
    _check_bc(bc)
    if dt <= 0.0:
        raise ValueError("dt must be positive, got %g" % dt)
    u = np.asarray(state.u, dtype=np.float64)
    v = np.asarray(state.v, dtype=np.float64)
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v)) and np.isfinite(state.q)):
        raise ValueError("non-finite velocity state")
    vshape = (grid.nx, grid.ny) if bc == "periodic" else (grid.nx, grid.ny + 1)
    if u.shape != (grid.nx, grid.ny) or v.shape != vshape:
        raise ValueError("state shapes %r, %r do not match grid" % (u.shape, v.shape))
    if bc == "channel":
        v = v.copy()
        v[:, 0] = 0.0   # wall faces are pinned, whatever noise rode in on them
        v[:, -1] = 0.0

    fu, fv = _convection(u, v, grid, bc)
    rhs_u = u - dt * state.q * fu
    rhs_v = v - dt * state.q * fv
    if forcing is not None:
        rhs_u = rhs_u + dt * forcing[0]
        rhs_v = rhs_v + dt * forcing[1]
    coef = nu * dt
    if bc == "periodic":
        us = _helmholtz_periodic(rhs_u, coef, grid)
        vs = _helmholtz_periodic(rhs_v, coef, grid)
    else:
        us = _helmholtz_channel_u(rhs_u, coef, grid)
        vs = np.zeros_like(v)
        vs[:, 1:-1] = _helmholtz_channel_v(rhs_v[:, 1:-1], coef, grid)

    star = NSState(u=us, v=vs, q=state.q)
    div = divergence(star, grid, bc)
    phi = _poisson_pressure(div / dt, grid, bc)
    un = us - dt * (phi - np.roll(phi, 1, axis=0)) / grid.hx
    if bc == "periodic":
        vn = vs - dt * (phi - np.roll(phi, 1, axis=1)) / grid.hy
    else:
        vn = vs.copy()
        vn[:, 1:-1] -= dt * (phi[:, 1:] - phi[:, :-1]) / grid.hy

    res = float(np.abs(divergence(NSState(u=un, v=vn, q=1.0), grid, bc)).max())
    if not res <= 1e-8:
        raise RuntimeError("projection failed: divergence residual %.3e exceeds 1e-8" % res)

    # scalar multiplier from the backward-differenced energy identity:
    #   theta*(q^2 - q_n^2) = |du|^2/2 + dt*q*(F(u_n), u_new)
    cell = grid.hx * grid.hy
    half_dd = 0.5 * _inner(un - u, vn - v, un - u, vn - v, cell)
    b = dt * _inner(fu, fv, un, vn, cell)
    c = theta * state.q * state.q + half_dd
    disc = np.sqrt(b * b + 4.0 * theta * c)
    roots = ((b + disc) / (2.0 * theta), (b - disc) / (2.0 * theta))
    qn = min(roots, key=lambda r: abs(r - 1.0))
    return NSState(u=un, v=vn, q=float(qn))
