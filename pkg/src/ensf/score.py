"""Score estimation from a finite ensemble.

The filter never trains a network: the score of the diffused ensemble
density is a closed-form softmax average over members.  Writing the
density as a mixture of Gaussian kernels centered at ``alpha * x_j``
with variance ``beta_sq`` gives

    score(z) = -(z - alpha * sum_j w_j(z) x_j) / beta_sq

with softmax weights over ``-|z - alpha x_j|^2 / (2 beta_sq)``.  The
expensive part is the weighted center; it runs either through a fused
compiled kernel (small d) or a BLAS matmul formulation (always
available, better for wide states).
"""

from __future__ import annotations

import os

import numpy as np
from scipy.special import logsumexp

from .schedule import DiffusionSchedule

try:
    from . import _kernels

    _HAVE_KERNEL = True
except ImportError:  # pragma: no cover - depends on build environment
    _kernels = None
    _HAVE_KERNEL = False

# Above this state dimension the per-query register accumulators stop
# paying off and SGEMM wins.
_FUSED_MAX_DIM = 32


class Ensemble(object):
    """A fixed collection of state vectors, shape (J, d).

    Members are copied and frozen at construction: score evaluation
    caches derived operands (transposed members, squared norms) and a
    later in-place edit would silently desynchronize them.  Accepts
    float32 (kept, used by the filter hot path) or anything castable to
    float64.
    """

    __slots__ = ("members", "_xt", "_csq")

    def __init__(self, members):
        arr = np.asarray(members)
        if arr.dtype != np.float32:
            arr = arr.astype(np.float64, copy=False)
        if arr.ndim != 2:
            raise ValueError("ensemble must be a (J, d) array, got shape %s" % (arr.shape,))
        j, d = arr.shape
        if j < 1 or d < 1:
            raise ValueError("ensemble needs at least one member and one dimension")
        if not np.all(np.isfinite(arr)):
            raise ValueError("ensemble members must be finite")
        arr = np.array(arr, order="C", copy=True)
        arr.setflags(write=False)
        self.members = arr
        self._xt = None
        self._csq = None

    @property
    def size(self):
        return self.members.shape[0]

    @property
    def dim(self):
        return self.members.shape[1]

    @property
    def dtype(self):
        return self.members.dtype

    def member_sq_norms(self):
        if self._csq is None:
            self._csq = np.einsum("jd,jd->j", self.members, self.members)
        return self._csq

    def members_t(self):
        if self._xt is None:
            self._xt = np.ascontiguousarray(self.members.T)
        return self._xt

    def __repr__(self):
        return "Ensemble(J=%d, d=%d, %s)" % (self.size, self.dim, self.dtype)


def _as_ensemble(ens):
    if isinstance(ens, Ensemble):
        return ens
    return Ensemble(ens)


def _as_queries(z, d, dtype):
    zq = np.asarray(z, dtype=dtype)
    if zq.ndim == 1:
        if zq.shape[0] != d:
            raise ValueError("query has dimension %d, ensemble has %d" % (zq.shape[0], d))
        return zq.reshape(1, d), True
    if zq.ndim == 2 and zq.shape[1] == d:
        return np.ascontiguousarray(zq), False
    raise ValueError("query must be (d,) or (Q, d) with d=%d, got %s" % (d, zq.shape))


def available_backends():
    """Names of usable weighted-center implementations."""
    return ("fused", "gemm") if _HAVE_KERNEL else ("gemm",)


def _pick_backend(d):
    env = os.environ.get("ENSF_SCORE_BACKEND", "auto")
    if env == "gemm":
        return "gemm"
    if env == "fused":
        if not _HAVE_KERNEL:
            raise RuntimeError("ENSF_SCORE_BACKEND=fused but the compiled kernel is not built")
        return "fused"
    if env != "auto":
        raise ValueError("unknown ENSF_SCORE_BACKEND %r" % env)
    if _HAVE_KERNEL and d <= _FUSED_MAX_DIM:
        return "fused"
    return "gemm"


def _weighted_center(z, members, a, b2, backend="gemm", prepared=None):
    """sum_j w_j(z) x_j for each query row; weights are the score softmax.

    ``prepared`` carries (members_T, member_sq_norms) when the caller has
    them cached; otherwise they are built here.
    """
    if prepared is not None:
        xt, csq = prepared
    else:
        csq = np.einsum("jd,jd->j", members, members)
        xt = None
    if backend == "fused":
        if not _HAVE_KERNEL:
            raise RuntimeError("compiled kernel not available")
        if xt is None:
            xt = np.ascontiguousarray(members.T)
        fn = _kernels.wcenter_f32 if z.dtype == np.float32 else _kernels.wcenter_f64
        return fn(z, xt, csq, a / b2, a * a / (2.0 * b2))
    if backend != "gemm":
        raise ValueError("unknown backend %r" % backend)
    # |z|^2 is constant per query and cancels in the softmax, so the
    # logit needs only the cross term and the member norms
    logits = (a / b2) * (z @ members.T)
    logits -= (a * a / (2.0 * b2)) * csq[None, :]
    logits -= logits.max(axis=1, keepdims=True)
    w = np.exp(logits)
    return (w @ members) / w.sum(axis=1, keepdims=True)


def log_weights(z, ensemble, tau, schedule=None):
    """Log softmax weights of each member for query point(s) z.

    Returns (J,) for a single query, (Q, J) for a batch.  Always
    computed in float64; this is the inspectable counterpart of the
    fused path inside :func:`estimate_score`.
    """
    sched = schedule if schedule is not None else DiffusionSchedule()
    ens = _as_ensemble(ensemble)
    a = float(sched.alpha_bar(tau))
    b2 = float(sched.beta_bar_sq(tau))
    m = ens.members.astype(np.float64, copy=False)
    zq, single = _as_queries(z, ens.dim, np.float64)
    logits = (a / b2) * (zq @ m.T)
    logits -= (a * a / (2.0 * b2)) * np.einsum("jd,jd->j", m, m)[None, :]
    lw = logits - logsumexp(logits, axis=1, keepdims=True)
    return lw[0] if single else lw


def estimate_score(z, ensemble, tau, schedule=None, backend=None):
    """Score of the diffused ensemble density at z.

    z may be a single state (d,) or a batch (Q, d); the result matches.
    Computation runs in the ensemble dtype.  ``backend`` forces "fused"
    or "gemm"; default picks per state dimension (environment variable
    ENSF_SCORE_BACKEND overrides).
    """
    sched = schedule if schedule is not None else DiffusionSchedule()
    ens = _as_ensemble(ensemble)
    a = float(sched.alpha_bar(tau))
    b2 = float(sched.beta_bar_sq(tau))
    zq, single = _as_queries(z, ens.dim, ens.dtype)
    bk = backend if backend is not None else _pick_backend(ens.dim)
    prepared = (
        ens.members_t() if bk == "fused" else None,
        ens.member_sq_norms(),
    )
    wc = _weighted_center(zq, ens.members, a, b2, bk, prepared=prepared)
    out = (a * wc - zq) / b2
    return out[0] if single else out
