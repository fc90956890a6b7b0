"""Turn a deterministic one-step map into a stochastic forward model."""

from __future__ import annotations

from typing import Callable

import numpy as np

__all__ = ["make_stochastic"]

_ORDERS = ("perturb-then-step", "step-then-perturb")

Forward = Callable[[np.ndarray, np.random.Generator], np.ndarray]


def make_stochastic(step: Forward, noise_std: float, order: str = "perturb-then-step") -> Forward:
    """Wrap ``step`` so each call injects additive white noise of size noise_std.

    ``step(x, rng)`` may itself draw from the generator, e.g. for random
    coefficients; the wrapper and the dynamics then share one stream.
    """
    if noise_std < 0.0 or not np.isfinite(noise_std):
        raise ValueError("noise_std must be finite and >= 0, got %g" % noise_std)
    if order not in _ORDERS:
        raise ValueError("order must be one of %s, got %r" % (", ".join(_ORDERS), order))

    def _noise(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        dtype = np.float32 if x.dtype == np.float32 else np.float64
        return noise_std * rng.standard_normal(x.shape, dtype=dtype)

    def forward(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        x = np.asarray(x)
        if noise_std == 0.0:
            return step(x, rng)
        if order == "perturb-then-step":
            return step(x + _noise(x, rng), rng)
        return step(x, rng) + _noise(x, rng)

    return forward
