"""Diffusion pseudo-time schedule for the forward/reverse SDE pair.

The forward diffusion interpolates between the target distribution at
tau=0 and (nearly) a standard normal at tau=1, with regularized
coefficients

    alpha_bar(tau) = 1 - tau * (1 - eps_alpha)
    beta_bar_sq(tau) = eps_beta + tau * (1 - eps_beta)

so the reverse-SDE drift -(1 - eps_alpha)/alpha_bar stays bounded on the
whole grid. The same regularized coefficients feed both the SDE
coefficients and the ensemble score estimator, keeping the sampler and
the score mutually consistent.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["DiffusionSchedule"]


def _check_tau(tau: float) -> float:
    tau = float(tau)
    if not (0.0 <= tau <= 1.0):
        raise ValueError(f"pseudo-time must lie in [0, 1], got {tau}")
    return tau


@dataclass(frozen=True)
class DiffusionSchedule:
    """Pseudo-time grid and SDE coefficients.

    eps_alpha, eps_beta: regularizers in (0, 1); n_steps: number M of
    reverse-SDE steps. The grid runs tau_0 = 1 > ... > tau_M = 0,
    uniformly spaced.
    """

    eps_alpha: float = 0.05
    eps_beta: float = 0.01
    n_steps: int = 300
    grid: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not (0.0 < self.eps_alpha < 1.0):
            raise ValueError(f"eps_alpha must lie in (0, 1), got {self.eps_alpha}")
        if not (0.0 < self.eps_beta < 1.0):
            raise ValueError(f"eps_beta must lie in (0, 1), got {self.eps_beta}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        grid = np.linspace(1.0, 0.0, self.n_steps + 1)
        grid.flags.writeable = False
        object.__setattr__(self, "grid", grid)

    def alpha_bar(self, tau: float) -> float:
        tau = _check_tau(tau)
        return 1.0 - tau * (1.0 - self.eps_alpha)

    def beta_bar_sq(self, tau: float) -> float:
        tau = _check_tau(tau)
        return self.eps_beta + tau * (1.0 - self.eps_beta)

    def drift_coeff(self, tau: float) -> float:
        """d(log alpha_bar)/dtau, the reverse-SDE linear drift factor."""
        return -(1.0 - self.eps_alpha) / self.alpha_bar(tau)

    def diffusion_coeff_sq(self, tau: float) -> float:
        """Squared diffusion: d(beta_bar_sq)/dtau - 2*drift*beta_bar_sq."""
        val = (1.0 - self.eps_beta) + 2.0 * (1.0 - self.eps_alpha) * self.beta_bar_sq(
            tau
        ) / self.alpha_bar(tau)
        assert val >= 0.0, f"corrupted schedule: sigma^2 = {val} < 0 at tau={tau}"
        return val
