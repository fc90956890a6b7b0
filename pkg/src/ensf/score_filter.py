"""The filter itself: predict with the forward model, update by sampling
the posterior through a reverse-time diffusion.

The update never fits anything.  The prior ensemble defines a mixture
density whose score is computable in closed form (score.py); observation
information enters as the gradient of the Gaussian log-likelihood, blended
in with a damping weight h(tau) = 1 - tau that vanishes at the noise end
of the diffusion and is fully on at the data end.  Integrating the reverse
SDE from fresh N(0, I) draws down to tau=0 yields samples of the posterior,
which become the next ensemble.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng as rng_mod
from .observe import Observation, ObservationModel, eval_g
from .schedule import DiffusionSchedule
from .score import Ensemble, estimate_score

_DAMPINGS = ("linear",)


@dataclass(frozen=True)
class EnSFConfig:
    """Update-step parameters: ensemble size J, reverse steps M, schedule.

    ``drift_clip`` bounds each component's drift increment per reverse
    step (a trust region for the explicit integrator).  Steep observation
    operators -- tan most of all -- produce likelihood gradients far too
    large for any practical step count; the clip turns those into bounded
    pulls toward the data instead of overshoots that compound.  Increments
    this large are already outside explicit Euler's validity, so clipping
    only alters steps that were wrong anyway.  None disables.
    """

    ensemble_size: int
    reverse_steps: int
    schedule: DiffusionSchedule = None
    damping: str = "linear"
    drift_clip: float = 10.0

    def __post_init__(self):
        if self.ensemble_size < 2:
            raise ValueError("ensemble_size must be >= 2")
        if self.reverse_steps < 1:
            raise ValueError("reverse_steps must be >= 1")
        if self.damping not in _DAMPINGS:
            raise ValueError("damping must be one of %s" % (_DAMPINGS,))
        if self.drift_clip is not None and not (self.drift_clip > 0):
            raise ValueError("drift_clip must be positive or None")
        if self.schedule is None:
            object.__setattr__(self, "schedule", DiffusionSchedule(n_steps=self.reverse_steps))
        elif self.schedule.n_steps != self.reverse_steps:
            raise ValueError(
                "schedule has %d steps but reverse_steps=%d"
                % (self.schedule.n_steps, self.reverse_steps)
            )


@dataclass(frozen=True)
class FilterState:
    """Posterior ensemble at assimilation step `step`, plus the master seed
    from which every later random stream is derived."""

    ensemble: Ensemble
    step: int
    seed: int

    def __post_init__(self):
        if not isinstance(self.ensemble, Ensemble):
            object.__setattr__(self, "ensemble", Ensemble(self.ensemble))
        if self.step < 0:
            raise ValueError("step must be >= 0")

    @property
    def mean(self):
        return self.ensemble.members.mean(axis=0)


def likelihood_score(z, obs, model, noise_std=None):
    """Gradient of log P(y | x=z); zero on unobserved components.

    z may be one state (d,) or a batch (Q, d).  ``noise_std`` overrides the
    model's scalar, and may be a length-|mask| vector for per-component
    noise levels (used when some observed entries are reconstructions
    rather than measurements).
    """
    z = np.asarray(z)
    sig = model.noise_std if noise_std is None else noise_std
    sig = np.asarray(sig, dtype=z.dtype)
    s2 = sig * sig
    if np.any(sig <= 0) or np.any(s2 == 0) or not np.all(np.isfinite(s2)):
        raise ValueError("degenerate likelihood: noise_std^2 must be positive and finite")
    mask = model.mask
    zm = z[..., mask]
    g, gp = eval_g(model.kind, zm)
    y = obs.values.astype(z.dtype, copy=False)
    out = np.zeros_like(z)
    out[..., mask] = gp * (y - g) / s2
    return out


def _as_pairs(obs, model, noise_std):
    if obs is None:
        return []
    if isinstance(obs, Observation):
        return [(obs, model, noise_std)]
    models = model if not isinstance(model, ObservationModel) else [model] * len(obs)
    sigs = noise_std if isinstance(noise_std, (list, tuple)) else [noise_std] * len(obs)
    if not (len(obs) == len(models) == len(sigs)):
        raise ValueError("observation, model, and noise lists must align")
    return list(zip(obs, models, sigs))


def posterior_score(z, tau, prior_ens, obs, model, cfg, noise_std=None):
    """Prior-ensemble score plus damped likelihood score, h(tau) = 1 - tau."""
    s = estimate_score(z, prior_ens, tau, cfg.schedule)
    pairs = _as_pairs(obs, model, noise_std)
    if not pairs:
        return s
    h = 1.0 - tau
    if h == 0.0:
        return s
    for o, m, sig in pairs:
        s = s + h * likelihood_score(z, o, m, noise_std=sig)
    return s


def reverse_sample(prior_ens, obs, model, cfg, rng, noise_std=None):
    """Draw cfg.ensemble_size posterior samples by reverse-SDE integration.

    Starts from fresh N(0, I) draws and Euler-Maruyama steps the reverse
    SDE across the schedule grid from tau=1 to tau=0, evaluating the
    posterior score at the left endpoint of each substep.  With no
    observation this reproduces the prior (it is a plain generative pass).
    """
    prior_ens = prior_ens if isinstance(prior_ens, Ensemble) else Ensemble(prior_ens)
    sched = cfg.schedule
    j, d = cfg.ensemble_size, prior_ens.dim
    dtype = prior_ens.dtype
    dtau = 1.0 / cfg.reverse_steps
    sq_dtau = math.sqrt(dtau)
    z = rng.standard_normal((j, d), dtype=dtype)
    for k in range(cfg.reverse_steps):
        tau = float(sched.grid[k])
        s = posterior_score(z, tau, prior_ens, obs, model, cfg, noise_std=noise_std)
        b = sched.drift_coeff(tau)
        s2 = sched.diffusion_coeff_sq(tau)
        xi = rng.standard_normal((j, d), dtype=dtype)
        inc = (s2 * s - b * z) * dtau
        if cfg.drift_clip is not None:
            np.clip(inc, -cfg.drift_clip, cfg.drift_clip, out=inc)
        z = z + inc + math.sqrt(s2) * sq_dtau * xi
        if not np.all(np.isfinite(z)):
            raise ValueError(
                "non-finite state in reverse integration at step %d, tau=%.6g" % (k, tau)
            )
    return Ensemble(z)


def predict(state, fwd):
    """Propagate each member through the stochastic forward map.

    Member j draws from its own stream (seed, "predict", step, j), so the
    result does not depend on propagation order and any member can be
    recomputed in isolation.
    """
    members = state.ensemble.members
    out = np.empty_like(members)
    for j in range(members.shape[0]):
        r = rng_mod.stream(state.seed, "predict", state.step, j)
        try:
            out[j] = fwd(members[j], r)
        except Exception as exc:
            raise RuntimeError(
                "forward solver failed on member %d at step %d: %s" % (j, state.step, exc)
            ) from exc
    return FilterState(Ensemble(out), step=state.step + 1, seed=state.seed)


def assimilate(state, obs, model, fwd, cfg, noise_std=None):
    """One full filter cycle: predict, then posterior sampling with obs."""
    first = obs if isinstance(obs, Observation) else obs[0]
    if first.time_index != state.step + 1:
        raise ValueError(
            "observation is for step %d, filter is at step %d"
            % (first.time_index, state.step)
        )
    prior = predict(state, fwd)
    r = rng_mod.stream(state.seed, "update", prior.step)
    post = reverse_sample(prior.ensemble, obs, model, cfg, r, noise_std=noise_std)
    return FilterState(post, step=prior.step, seed=state.seed)
