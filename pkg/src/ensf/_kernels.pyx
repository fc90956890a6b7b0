# cython: language_level=3, boundscheck=False, wraparound=False
"""Thin binding over the C weighted-center kernel.

All real work happens in _wcenter.h; this module only checks shapes,
allocates the output, and releases the GIL for the call.  The package
works without it (score.py falls back to a BLAS formulation), it is
just slower for small state dimensions.
"""

import numpy as np

cimport numpy as cnp


cdef extern from "_wcenter.h":
    void ensf_wcenter_f32(const float* Z, const float* Xt, const float* csq,
                          int Q, int J, int d, float c1, float c2,
                          float* out) nogil
    void ensf_wcenter_f64(const double* Z, const double* Xt, const double* csq,
                          int Q, int J, int d, double c1, double c2,
                          double* out) nogil


def wcenter_f32(const float[:, ::1] z, const float[:, ::1] xt,
                const float[::1] csq, float c1, float c2):
    cdef int q = z.shape[0]
    cdef int d = z.shape[1]
    cdef int j = xt.shape[1]
    if xt.shape[0] != d or csq.shape[0] != j:
        raise ValueError("mismatched kernel operand shapes")
    out = np.empty((q, d), dtype=np.float32)
    cdef float[:, ::1] ov = out
    with nogil:
        ensf_wcenter_f32(&z[0, 0], &xt[0, 0], &csq[0], q, j, d, c1, c2,
                         &ov[0, 0])
    return out


def wcenter_f64(const double[:, ::1] z, const double[:, ::1] xt,
                const double[::1] csq, double c1, double c2):
    cdef int q = z.shape[0]
    cdef int d = z.shape[1]
    cdef int j = xt.shape[1]
    if xt.shape[0] != d or csq.shape[0] != j:
        raise ValueError("mismatched kernel operand shapes")
    out = np.empty((q, d), dtype=np.float64)
    cdef double[:, ::1] ov = out
    with nogil:
        ensf_wcenter_f64(&z[0, 0], &xt[0, 0], &csq[0], q, j, d, c1, c2,
                         &ov[0, 0])
    return out
