"""Observation operators: componentwise nonlinearity on a sparse mask.

A twin experiment observes y = g(x restricted to mask) + noise with g
one of identity, arctan, tan, and isotropic Gaussian noise.  The mask
is drawn once per experiment and held fixed, which is what makes the
inpainting stage meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_KINDS = ("identity", "arctan", "tan")

# tan is treated as ill-posed this close to a pole; likelihood code that
# must evaluate it on arbitrary ensemble states uses eval_g instead.
_POLE_TOL = 1e-6


@dataclass(frozen=True)
class ObservationModel:
    """Componentwise operator g, observed index set, and noise level."""

    kind: str
    mask: object
    noise_std: float

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError("kind must be one of %s, got %r" % (", ".join(_KINDS), self.kind))
        mask = np.asarray(self.mask, dtype=np.intp)
        if mask.ndim != 1 or mask.size == 0:
            raise ValueError("mask must be a nonempty 1-d index list")
        if mask.min() < 0:
            raise ValueError("mask indices must be non-negative")
        mask = np.sort(mask)
        if np.any(np.diff(mask) == 0):
            raise ValueError("mask indices must be distinct")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)
        if not (self.noise_std >= 0):
            raise ValueError("noise_std must be >= 0, got %r" % (self.noise_std,))


@dataclass(frozen=True)
class Observation:
    """One assimilation step's measured values (length |mask|)."""

    values: np.ndarray
    time_index: int = 0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(vals)):
            raise ValueError("observation values must be finite")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def make_mask(d, fraction, rng):
    """Draw ceil(fraction*d) distinct observed indices, sorted.

    The small guard keeps binary float fuzz (0.1*100 = 10.0000...02)
    from bumping the ceiling up a slot.
    """
    if not (0.0 < fraction <= 1.0):
        raise ValueError("fraction must be in (0, 1], got %r" % (fraction,))
    count = int(math.ceil(fraction * d - 1e-9))
    count = max(1, min(count, d))
    mask = np.sort(rng.choice(d, size=count, replace=False)).astype(np.intp)
    mask.setflags(write=False)
    return mask


def _check_tan_domain(xm):
    # poles at pi/2 + k*pi
    r = np.remainder(xm - math.pi / 2, math.pi)
    dist = np.minimum(r, math.pi - r)
    if np.any(dist < _POLE_TOL):
        bad = float(np.asarray(xm)[dist < _POLE_TOL].flat[0])
        raise ValueError(
            "tan observation evaluated within %g of a pole (x=%r)" % (_POLE_TOL, bad)
        )


def apply(model, x):
    """g(x) restricted to the observed components."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("state must be finite")
    xm = x[model.mask]
    if model.kind == "identity":
        return xm.copy()
    if model.kind == "arctan":
        return np.arctan(xm)
    _check_tan_domain(xm)
    return np.tan(xm)


def perturb(model, clean, rng, time_index=0):
    """Add N(0, noise_std^2) to each observed component."""
    clean = np.asarray(clean, dtype=np.float64)
    if model.noise_std == 0.0:
        return Observation(clean, time_index)
    noisy = clean + model.noise_std * rng.standard_normal(clean.shape)
    return Observation(noisy, time_index)


def eval_g(kind, v):
    """(g(v), g'(v)) for filter-side evaluation on raw ensemble values.

    Unlike :func:`apply`, never errors.  tan is evaluated as-is: in float
    arithmetic it stays finite arbitrarily close to a pole (merely huge),
    and its pi-periodicity means far-out states are pulled toward the
    nearest branch rather than saturating.  Consumers that integrate with
    explicit steps must bound the resulting increments themselves.
    Vectorized over any array shape.
    """
    if kind == "identity":
        return v, np.ones_like(v)
    if kind == "arctan":
        return np.arctan(v), 1.0 / (1.0 + v * v)
    if kind == "tan":
        t = np.tan(v)
        return t, 1.0 + t * t
    raise ValueError("unknown kind %r" % kind)


def jacobian_diag(model, x):
    """g'(x_i) on the mask; diagonal because g acts componentwise."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("state must be finite")
    xm = x[model.mask]
    if model.kind == "identity":
        return np.ones_like(xm)
    if model.kind == "arctan":
        return 1.0 / (1.0 + xm * xm)
    _check_tan_domain(xm)
    t = np.tan(xm)
    return 1.0 + t * t
