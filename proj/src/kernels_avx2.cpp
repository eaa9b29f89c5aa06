// AVX2+FMA variants of the float kernels. This file is compiled with
// -mavx2 -mfma on x86-64 only; runtime dispatch (kernels_dispatch.cpp)
// guarantees these are never called on CPUs without AVX2.

#include "tatn/kernels.hpp"

#if TATN_HAVE_AVX2_LANE

#include <immintrin.h>

#include <cmath>

namespace tatn::kern::avx2 {

namespace {

inline float hsum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 sh = _mm_movehdup_ps(lo);
  lo = _mm_add_ps(lo, sh);
  sh = _mm_movehl_ps(sh, lo);
  lo = _mm_add_ss(lo, sh);
  return _mm_cvtss_f32(lo);
}

inline float hmax(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_max_ps(lo, hi);
  lo = _mm_max_ps(lo, _mm_movehdup_ps(lo));
  lo = _mm_max_ss(lo, _mm_movehl_ps(lo, lo));
  return _mm_cvtss_f32(lo);
}

// exp on 8 lanes, Cephes polynomial with Cody-Waite range reduction.
// Inputs are clamped to the representable range; relative error is a couple
// of ulp against libm.
inline __m256 exp8(__m256 x) {
  const __m256 hi = _mm256_set1_ps(88.3762626647949f);
  const __m256 lo = _mm256_set1_ps(-87.3365478515625f);
  const __m256 log2e = _mm256_set1_ps(1.44269504088896341f);
  const __m256 c1 = _mm256_set1_ps(0.693359375f);
  const __m256 c2 = _mm256_set1_ps(-2.12194440e-4f);
  const __m256 one = _mm256_set1_ps(1.0f);

  x = _mm256_min_ps(_mm256_max_ps(x, lo), hi);
  __m256 fx = _mm256_round_ps(_mm256_mul_ps(x, log2e),
                              _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  // r = x - fx*ln2, split into two steps for accuracy
  __m256 r = _mm256_fnmadd_ps(fx, c1, x);
  r = _mm256_fnmadd_ps(fx, c2, r);

  __m256 p = _mm256_set1_ps(1.9875691500e-4f);
  p = _mm256_fmadd_ps(p, r, _mm256_set1_ps(1.3981999507e-3f));
  p = _mm256_fmadd_ps(p, r, _mm256_set1_ps(8.3334519073e-3f));
  p = _mm256_fmadd_ps(p, r, _mm256_set1_ps(4.1665795894e-2f));
  p = _mm256_fmadd_ps(p, r, _mm256_set1_ps(1.6666665459e-1f));
  p = _mm256_fmadd_ps(p, r, _mm256_set1_ps(5.0000001201e-1f));
  p = _mm256_fmadd_ps(p, _mm256_mul_ps(r, r), _mm256_add_ps(r, one));

  __m256i n = _mm256_cvtps_epi32(fx);
  n = _mm256_slli_epi32(_mm256_add_epi32(n, _mm256_set1_epi32(127)), 23);
  return _mm256_mul_ps(p, _mm256_castsi256_ps(n));
}

// tanh on 8 lanes: odd polynomial below 0.625, exp-based formula above,
// saturation past 7.9 (Cephes tanhf piecewise scheme).
inline __m256 tanh8(__m256 x) {
  const __m256 sign_mask = _mm256_set1_ps(-0.0f);
  __m256 sign = _mm256_and_ps(x, sign_mask);
  __m256 z = _mm256_andnot_ps(sign_mask, x);

  // |x| >= 0.625: 1 - 2/(exp(2|x|)+1)
  __m256 e = exp8(_mm256_add_ps(z, z));
  __m256 one = _mm256_set1_ps(1.0f);
  __m256 big = _mm256_sub_ps(
      one, _mm256_div_ps(_mm256_set1_ps(2.0f), _mm256_add_ps(e, one)));

  // |x| < 0.625: x + x^3 * P(x^2)
  __m256 s = _mm256_mul_ps(z, z);
  __m256 p = _mm256_set1_ps(-5.70498872745e-3f);
  p = _mm256_fmadd_ps(p, s, _mm256_set1_ps(2.06390887954e-2f));
  p = _mm256_fmadd_ps(p, s, _mm256_set1_ps(-5.37397155531e-2f));
  p = _mm256_fmadd_ps(p, s, _mm256_set1_ps(1.33314422036e-1f));
  p = _mm256_fmadd_ps(p, s, _mm256_set1_ps(-3.33332819422e-1f));
  __m256 small = _mm256_fmadd_ps(_mm256_mul_ps(p, s), z, z);

  __m256 use_big = _mm256_cmp_ps(z, _mm256_set1_ps(0.625f), _CMP_GE_OQ);
  __m256 r = _mm256_blendv_ps(small, big, use_big);
  __m256 sat = _mm256_cmp_ps(z, _mm256_set1_ps(7.90531110763549805f), _CMP_GT_OQ);
  r = _mm256_blendv_ps(r, one, sat);
  return _mm256_or_ps(r, sign);
}

inline __m256 sigmoid8(__m256 x) {
  const __m256 one = _mm256_set1_ps(1.0f);
  __m256 e = exp8(_mm256_sub_ps(_mm256_setzero_ps(), x));
  return _mm256_div_ps(one, _mm256_add_ps(one, e));
}

template <typename F8, typename F1>
inline void map1(int n, const float* a, float* out, F8 f8, F1 f1) {
  int i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, f8(_mm256_loadu_ps(a + i)));
  for (; i < n; ++i) out[i] = f1(a[i]);
}

// C = A*B (+=) with A m x k, B k x n: broadcast-FMA over rows of B.
// a_stride/a_step describe how to walk op(A)'s row i: element (i,p) lives at
// a[i*a_stride + p*a_step], which covers both the nn and tn layouts.
inline void gemm_rowmajor(bool acc, int m, int n, int k, const float* a,
                          int a_stride, int a_step, const float* b, float* c) {
  for (int i = 0; i < m; ++i) {
    float* crow = c + i * n;
    if (!acc) {
      int j = 0;
      __m256 zero = _mm256_setzero_ps();
      for (; j + 8 <= n; j += 8) _mm256_storeu_ps(crow + j, zero);
      for (; j < n; ++j) crow[j] = 0.0f;
    }
    const float* arow = a + i * a_stride;
    for (int p = 0; p < k; ++p) {
      float av = arow[p * a_step];
      if (av == 0.0f) continue;
      __m256 a8 = _mm256_set1_ps(av);
      const float* brow = b + p * n;
      int j = 0;
      for (; j + 8 <= n; j += 8) {
        __m256 cv = _mm256_loadu_ps(crow + j);
        cv = _mm256_fmadd_ps(a8, _mm256_loadu_ps(brow + j), cv);
        _mm256_storeu_ps(crow + j, cv);
      }
      for (; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C = A*B^T (+=): dot products of A rows with B rows.
inline void gemm_nt(bool acc, int m, int n, int k, const float* a,
                    const float* b, float* c) {
  for (int i = 0; i < m; ++i) {
    const float* arow = a + i * k;
    for (int j = 0; j < n; ++j) {
      const float* brow = b + j * k;
      __m256 s8 = _mm256_setzero_ps();
      int p = 0;
      for (; p + 8 <= k; p += 8)
        s8 = _mm256_fmadd_ps(_mm256_loadu_ps(arow + p),
                             _mm256_loadu_ps(brow + p), s8);
      float s = hsum(s8);
      for (; p < k; ++p) s += arow[p] * brow[p];
      float* out = c + i * n + j;
      *out = acc ? *out + s : s;
    }
  }
}

}  // namespace

void gemm(bool ta, bool tb, bool acc, int m, int n, int k, const float* a,
          const float* b, float* c) {
  if (!tb) {
    if (!ta)
      gemm_rowmajor(acc, m, n, k, a, k, 1, b, c);  // nn
    else
      gemm_rowmajor(acc, m, n, k, a, 1, m, b, c);  // tn: (i,p) at a[p*m+i]
  } else if (!ta) {
    gemm_nt(acc, m, n, k, a, b, c);
  } else {
    scalar::gemm(ta, tb, acc, m, n, k, a, b, c);  // tt: unused by the tape
  }
}

void vadd(int n, const float* a, const float* b, float* out) {
  int i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_add_ps(_mm256_loadu_ps(a + i),
                                            _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}
void vsub(int n, const float* a, const float* b, float* out) {
  int i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_sub_ps(_mm256_loadu_ps(a + i),
                                            _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}
void vmul(int n, const float* a, const float* b, float* out) {
  int i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_mul_ps(_mm256_loadu_ps(a + i),
                                            _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}
void vaddc(int n, const float* a, float c, float* out) {
  __m256 c8 = _mm256_set1_ps(c);
  int i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_add_ps(_mm256_loadu_ps(a + i), c8));
  for (; i < n; ++i) out[i] = a[i] + c;
}
void vscale(int n, const float* a, float c, float* out) {
  __m256 c8 = _mm256_set1_ps(c);
  int i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), c8));
  for (; i < n; ++i) out[i] = a[i] * c;
}
void axpy(int n, float alpha, const float* x, float* y) {
  __m256 a8 = _mm256_set1_ps(alpha);
  int i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 yv = _mm256_loadu_ps(y + i);
    yv = _mm256_fmadd_ps(a8, _mm256_loadu_ps(x + i), yv);
    _mm256_storeu_ps(y + i, yv);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}
void vexp(int n, const float* a, float* out) {
  map1(n, a, out, [](__m256 x) { return exp8(x); },
       [](float x) { return _mm_cvtss_f32(_mm256_castps256_ps128(
                         exp8(_mm256_set1_ps(x)))); });
}
void vtanh(int n, const float* a, float* out) {
  map1(n, a, out, [](__m256 x) { return tanh8(x); },
       [](float x) { return _mm_cvtss_f32(_mm256_castps256_ps128(
                         tanh8(_mm256_set1_ps(x)))); });
}
void vsigmoid(int n, const float* a, float* out) {
  map1(n, a, out, [](__m256 x) { return sigmoid8(x); },
       [](float x) { return _mm_cvtss_f32(_mm256_castps256_ps128(
                         sigmoid8(_mm256_set1_ps(x)))); });
}
float vsum(int n, const float* a) {
  __m256 s8 = _mm256_setzero_ps();
  int i = 0;
  for (; i + 8 <= n; i += 8) s8 = _mm256_add_ps(s8, _mm256_loadu_ps(a + i));
  float s = hsum(s8);
  for (; i < n; ++i) s += a[i];
  return s;
}
float vdot(int n, const float* a, const float* b) {
  __m256 s8 = _mm256_setzero_ps();
  int i = 0;
  for (; i + 8 <= n; i += 8)
    s8 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), s8);
  float s = hsum(s8);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}
float vmax(int n, const float* a) {
  if (n < 8) return scalar::vmax(n, a);
  __m256 m8 = _mm256_loadu_ps(a);
  int i = 8;
  for (; i + 8 <= n; i += 8) m8 = _mm256_max_ps(m8, _mm256_loadu_ps(a + i));
  float m = hmax(m8);
  for (; i < n; ++i)
    if (a[i] > m) m = a[i];
  return m;
}

}  // namespace tatn::kern::avx2

#endif  // TATN_HAVE_AVX2_LANE
