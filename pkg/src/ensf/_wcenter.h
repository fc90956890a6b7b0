#ifndef ENSF_WCENTER_H
#define ENSF_WCENTER_H

/* Weighted-center kernel behind the score estimate.
 *
 * For each query z the score needs sum_j w_j x_j with softmax weights
 * w_j over log-kernels -|z - a x_j|^2 / (2 b2).  The |z|^2 term cancels
 * in the softmax, so the logit reduces to c1 z.x_j - c2 |x_j|^2 with
 * c1 = a/b2, c2 = a^2/(2 b2).  Members are passed transposed (d x J,
 * row-contiguous) so the inner loops stream over j.
 *
 * Single-threaded by design: callers batch queries, and one core of
 * AVX FMA plus the polynomial exp below is enough to keep the score
 * evaluation off the profile.
 */

#include <float.h>
#include <math.h>
#include <stdlib.h>

/* exp(x) for x <= 0 via 2^(x log2 e): rint splits out the exponent bits,
 * degree-5 polynomial covers 2^f on [-0.5, 0.5].  Max rel err ~6e-6,
 * which is below fp32 accumulation noise here.  Clamp keeps the result
 * a normal float; branch-free so the compiler can vectorize. */
static inline float ensf_exp_neg_f32(float x) {
  x = x < -87.0f ? -87.0f : x;
  float y = x * 1.442695041f;
  float k = __builtin_rintf(y);
  float f = y - k;
  float p = 1.3534550e-3f;
  p = p * f + 9.6178371e-3f;
  p = p * f + 5.5502813e-2f;
  p = p * f + 2.4022652e-1f;
  p = p * f + 6.9314718e-1f;
  p = p * f + 1.0f;
  union { float f; int i; } u;
  u.i = ((int)k + 127) << 23;
  return p * u.f;
}

/* Fixed-dimension variants keep the per-query accumulator in registers.
 * Two passes over j per query: logits + running max, then exp + accumulate.
 * Max is seeded from a finite sentinel, not -inf: the build runs with
 * -ffast-math, which is allowed to assume infinities never occur. */
#define ENSF_DEF_WC32(DD)                                                     \
  static void ensf_wc32_d##DD(const float *restrict Z,                       \
                              const float *restrict Xt,                      \
                              const float *restrict csq,                     \
                              float *restrict args, int Q, int J, float c1,  \
                              float c2, float *restrict out) {               \
    for (int q = 0; q < Q; q++) {                                            \
      const float *restrict z = Z + (size_t)q * DD;                          \
      float zc[DD];                                                          \
      for (int i = 0; i < DD; i++) zc[i] = c1 * z[i];                        \
      float m = -FLT_MAX;                                                    \
      for (int j = 0; j < J; j++) {                                          \
        float a = -c2 * csq[j];                                              \
        for (int i = 0; i < DD; i++) a += zc[i] * Xt[(size_t)i * J + j];     \
        args[j] = a;                                                         \
        m = a > m ? a : m;                                                   \
      }                                                                      \
      float s = 0.0f;                                                        \
      float acc[DD];                                                         \
      for (int i = 0; i < DD; i++) acc[i] = 0.0f;                            \
      for (int j = 0; j < J; j++) {                                          \
        float w = ensf_exp_neg_f32(args[j] - m);                             \
        s += w;                                                              \
        for (int i = 0; i < DD; i++) acc[i] += w * Xt[(size_t)i * J + j];    \
      }                                                                      \
      for (int i = 0; i < DD; i++) out[(size_t)q * DD + i] = acc[i] / s;     \
    }                                                                        \
  }

#define ENSF_DEF_WC64(DD)                                                     \
  static void ensf_wc64_d##DD(const double *restrict Z,                      \
                              const double *restrict Xt,                     \
                              const double *restrict csq,                    \
                              double *restrict args, int Q, int J,           \
                              double c1, double c2, double *restrict out) {  \
    for (int q = 0; q < Q; q++) {                                            \
      const double *restrict z = Z + (size_t)q * DD;                         \
      double zc[DD];                                                         \
      for (int i = 0; i < DD; i++) zc[i] = c1 * z[i];                        \
      double m = -DBL_MAX;                                                   \
      for (int j = 0; j < J; j++) {                                          \
        double a = -c2 * csq[j];                                             \
        for (int i = 0; i < DD; i++) a += zc[i] * Xt[(size_t)i * J + j];     \
        args[j] = a;                                                         \
        m = a > m ? a : m;                                                   \
      }                                                                      \
      double s = 0.0;                                                        \
      double acc[DD];                                                        \
      for (int i = 0; i < DD; i++) acc[i] = 0.0;                             \
      for (int j = 0; j < J; j++) {                                          \
        double w = exp(args[j] - m);                                         \
        s += w;                                                              \
        for (int i = 0; i < DD; i++) acc[i] += w * Xt[(size_t)i * J + j];    \
      }                                                                      \
      for (int i = 0; i < DD; i++) out[(size_t)q * DD + i] = acc[i] / s;     \
    }                                                                        \
  }

ENSF_DEF_WC32(1)
ENSF_DEF_WC32(2)
ENSF_DEF_WC32(3)
ENSF_DEF_WC32(4)
ENSF_DEF_WC32(5)
ENSF_DEF_WC32(6)
ENSF_DEF_WC32(7)
ENSF_DEF_WC32(8)

ENSF_DEF_WC64(1)
ENSF_DEF_WC64(2)
ENSF_DEF_WC64(3)
ENSF_DEF_WC64(4)
ENSF_DEF_WC64(5)
ENSF_DEF_WC64(6)
ENSF_DEF_WC64(7)
ENSF_DEF_WC64(8)

/* Arbitrary d: same math, logits built one coordinate row at a time so
 * every inner loop still streams over j. */
static void ensf_wc32_generic(const float *restrict Z,
                              const float *restrict Xt,
                              const float *restrict csq,
                              float *restrict args, int Q, int J, int d,
                              float c1, float c2, float *restrict out) {
  for (int q = 0; q < Q; q++) {
    const float *restrict z = Z + (size_t)q * d;
    for (int j = 0; j < J; j++) args[j] = -c2 * csq[j];
    for (int i = 0; i < d; i++) {
      const float zi = c1 * z[i];
      const float *restrict row = Xt + (size_t)i * J;
      for (int j = 0; j < J; j++) args[j] += zi * row[j];
    }
    float m = -FLT_MAX;
    for (int j = 0; j < J; j++) m = args[j] > m ? args[j] : m;
    float s = 0.0f;
    for (int j = 0; j < J; j++) {
      float w = ensf_exp_neg_f32(args[j] - m);
      args[j] = w;
      s += w;
    }
    float *restrict o = out + (size_t)q * d;
    for (int i = 0; i < d; i++) {
      const float *restrict row = Xt + (size_t)i * J;
      float acc = 0.0f;
      for (int j = 0; j < J; j++) acc += args[j] * row[j];
      o[i] = acc / s;
    }
  }
}

static void ensf_wc64_generic(const double *restrict Z,
                              const double *restrict Xt,
                              const double *restrict csq,
                              double *restrict args, int Q, int J, int d,
                              double c1, double c2, double *restrict out) {
  for (int q = 0; q < Q; q++) {
    const double *restrict z = Z + (size_t)q * d;
    for (int j = 0; j < J; j++) args[j] = -c2 * csq[j];
    for (int i = 0; i < d; i++) {
      const double zi = c1 * z[i];
      const double *restrict row = Xt + (size_t)i * J;
      for (int j = 0; j < J; j++) args[j] += zi * row[j];
    }
    double m = -DBL_MAX;
    for (int j = 0; j < J; j++) m = args[j] > m ? args[j] : m;
    double s = 0.0;
    for (int j = 0; j < J; j++) {
      double w = exp(args[j] - m);
      args[j] = w;
      s += w;
    }
    double *restrict o = out + (size_t)q * d;
    for (int i = 0; i < d; i++) {
      const double *restrict row = Xt + (size_t)i * J;
      double acc = 0.0;
      for (int j = 0; j < J; j++) acc += args[j] * row[j];
      o[i] = acc / s;
    }
  }
}

static void ensf_wcenter_f32(const float *Z, const float *Xt,
                             const float *csq, int Q, int J, int d, float c1,
                             float c2, float *out) {
  float *args = (float *)malloc((size_t)J * sizeof(float));
  if (!args) abort();
  switch (d) {
    case 1: ensf_wc32_d1(Z, Xt, csq, args, Q, J, c1, c2, out); break;
    case 2: ensf_wc32_d2(Z, Xt, csq, args, Q, J, c1, c2, out); break;
    case 3: ensf_wc32_d3(Z, Xt, csq, args, Q, J, c1, c2, out); break;
    case 4: ensf_wc32_d4(Z, Xt, csq, args, Q, J, c1, c2, out); break;
    case 5: ensf_wc32_d5(Z, Xt, csq, args, Q, J, c1, c2, out); break;
    case 6: ensf_wc32_d6(Z, Xt, csq, args, Q, J, c1, c2, out); break;
    case 7: ensf_wc32_d7(Z, Xt, csq, args, Q, J, c1, c2, out); break;
    case 8: ensf_wc32_d8(Z, Xt, csq, args, Q, J, c1, c2, out); break;
    default: ensf_wc32_generic(Z, Xt, csq, args, Q, J, d, c1, c2, out);
  }
  free(args);
}

static void ensf_wcenter_f64(const double *Z, const double *Xt,
                             const double *csq, int Q, int J, int d,
                             double c1, double c2, double *out) {
  double *args = (double *)malloc((size_t)J * sizeof(double));
  if (!args) abort();
  switch (d) {
    case 1: ensf_wc64_d1(Z, Xt, csq, args, Q, J, c1, c2, out); break;
    case 2: ensf_wc64_d2(Z, Xt, csq, args, Q, J, c1, c2, out); break;
    case 3: ensf_wc64_d3(Z, Xt, csq, args, Q, J, c1, c2, out); break;
    case 4: ensf_wc64_d4(Z, Xt, csq, args, Q, J, c1, c2, out); break;
    case 5: ensf_wc64_d5(Z, Xt, csq, args, Q, J, c1, c2, out); break;
    case 6: ensf_wc64_d6(Z, Xt, csq, args, Q, J, c1, c2, out); break;
    case 7: ensf_wc64_d7(Z, Xt, csq, args, Q, J, c1, c2, out); break;
    case 8: ensf_wc64_d8(Z, Xt, csq, args, Q, J, c1, c2, out); break;
    default: ensf_wc64_generic(Z, Xt, csq, args, Q, J, d, c1, c2, out);
  }
  free(args);
}

#endif /* ENSF_WCENTER_H */
