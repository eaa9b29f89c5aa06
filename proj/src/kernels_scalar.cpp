#include "tatn/kernels.hpp"

#include <cmath>

namespace tatn::kern::scalar {

namespace {

// Element of op(A) at (i,p) for an m x k operand stored row-major,
// or k x m when transposed.
template <typename T>
inline T at(const T* a, bool trans, int rows, int cols, int i, int p) {
  return trans ? a[p * rows + i] : a[i * cols + p];
}

template <typename T>
void gemm_impl(bool ta, bool tb, bool acc, int m, int n, int k, const T* a,
               const T* b, T* c) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      T s = 0;
      for (int p = 0; p < k; ++p)
        s += at(a, ta, m, k, i, p) * at(b, tb, k, n, p, j);
      T* out = c + i * n + j;
      *out = acc ? *out + s : s;
    }
  }
}

}  // namespace

void gemm(bool ta, bool tb, bool acc, int m, int n, int k, const float* a,
          const float* b, float* c) {
  gemm_impl(ta, tb, acc, m, n, k, a, b, c);
}

void vadd(int n, const float* a, const float* b, float* out) {
  for (int i = 0; i < n; ++i) out[i] = a[i] + b[i];
}
void vsub(int n, const float* a, const float* b, float* out) {
  for (int i = 0; i < n; ++i) out[i] = a[i] - b[i];
}
void vmul(int n, const float* a, const float* b, float* out) {
  for (int i = 0; i < n; ++i) out[i] = a[i] * b[i];
}
void vaddc(int n, const float* a, float c, float* out) {
  for (int i = 0; i < n; ++i) out[i] = a[i] + c;
}
void vscale(int n, const float* a, float c, float* out) {
  for (int i = 0; i < n; ++i) out[i] = a[i] * c;
}
void axpy(int n, float alpha, const float* x, float* y) {
  for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}
void vexp(int n, const float* a, float* out) {
  for (int i = 0; i < n; ++i) out[i] = std::exp(a[i]);
}
void vtanh(int n, const float* a, float* out) {
  for (int i = 0; i < n; ++i) out[i] = std::tanh(a[i]);
}
void vsigmoid(int n, const float* a, float* out) {
  for (int i = 0; i < n; ++i) out[i] = 1.0f / (1.0f + std::exp(-a[i]));
}
float vsum(int n, const float* a) {
  float s = 0;
  for (int i = 0; i < n; ++i) s += a[i];
  return s;
}
float vdot(int n, const float* a, const float* b) {
  float s = 0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}
float vmax(int n, const float* a) {
  float m = a[0];
  for (int i = 1; i < n; ++i)
    if (a[i] > m) m = a[i];
  return m;
}

}  // namespace tatn::kern::scalar

namespace tatn::kern {

// 64-bit lane: plain reference code, used by the gradient-check path.
void gemm(bool ta, bool tb, bool acc, int m, int n, int k, const double* a,
          const double* b, double* c) {
  scalar::gemm_impl(ta, tb, acc, m, n, k, a, b, c);
}
void vadd(int n, const double* a, const double* b, double* out) {
  for (int i = 0; i < n; ++i) out[i] = a[i] + b[i];
}
void vsub(int n, const double* a, const double* b, double* out) {
  for (int i = 0; i < n; ++i) out[i] = a[i] - b[i];
}
void vmul(int n, const double* a, const double* b, double* out) {
  for (int i = 0; i < n; ++i) out[i] = a[i] * b[i];
}
void vaddc(int n, const double* a, double c, double* out) {
  for (int i = 0; i < n; ++i) out[i] = a[i] + c;
}
void vscale(int n, const double* a, double c, double* out) {
  for (int i = 0; i < n; ++i) out[i] = a[i] * c;
}
void axpy(int n, double alpha, const double* x, double* y) {
  for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}
void vexp(int n, const double* a, double* out) {
  for (int i = 0; i < n; ++i) out[i] = std::exp(a[i]);
}
void vtanh(int n, const double* a, double* out) {
  for (int i = 0; i < n; ++i) out[i] = std::tanh(a[i]);
}
void vsigmoid(int n, const double* a, double* out) {
  for (int i = 0; i < n; ++i) out[i] = 1.0 / (1.0 + std::exp(-a[i]));
}
double vsum(int n, const double* a) {
  double s = 0;
  for (int i = 0; i < n; ++i) s += a[i];
  return s;
}
double vdot(int n, const double* a, const double* b) {
  double s = 0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}
double vmax(int n, const double* a) {
  double m = a[0];
  for (int i = 1; i < n; ++i)
    if (a[i] > m) m = a[i];
  return m;
}

}  // namespace tatn::kern
