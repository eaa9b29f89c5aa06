#include "tatn/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace tatn::kern {

namespace {

struct Table {
  void (*gemm)(bool, bool, bool, int, int, int, const float*, const float*,
               float*);
  void (*vadd)(int, const float*, const float*, float*);
  void (*vsub)(int, const float*, const float*, float*);
  void (*vmul)(int, const float*, const float*, float*);
  void (*vaddc)(int, const float*, float, float*);
  void (*vscale)(int, const float*, float, float*);
  void (*axpy)(int, float, const float*, float*);
  void (*vexp)(int, const float*, float*);
  void (*vtanh)(int, const float*, float*);
  void (*vsigmoid)(int, const float*, float*);
  float (*vsum)(int, const float*);
  float (*vdot)(int, const float*, const float*);
  float (*vmax)(int, const float*);
};

constexpr Table kScalar = {
    scalar::gemm, scalar::vadd,  scalar::vsub,  scalar::vmul,
    scalar::vaddc, scalar::vscale, scalar::axpy, scalar::vexp,
    scalar::vtanh, scalar::vsigmoid, scalar::vsum, scalar::vdot,
    scalar::vmax};

#if TATN_HAVE_AVX2_LANE
constexpr Table kAvx2 = {
    avx2::gemm, avx2::vadd,  avx2::vsub,  avx2::vmul,
    avx2::vaddc, avx2::vscale, avx2::axpy, avx2::vexp,
    avx2::vtanh, avx2::vsigmoid, avx2::vsum, avx2::vdot,
    avx2::vmax};
#endif

struct State {
  Backend backend;
  const Table* table;
};

State initial_state() {
  Backend b = avx2_available() ? Backend::Avx2 : Backend::Scalar;
  if (const char* env = std::getenv("TATN_KERNEL")) {
    if (std::strcmp(env, "scalar") == 0) b = Backend::Scalar;
    if (std::strcmp(env, "avx2") == 0 && avx2_available()) b = Backend::Avx2;
  }
#if TATN_HAVE_AVX2_LANE
  return {b, b == Backend::Avx2 ? &kAvx2 : &kScalar};
#else
  return {Backend::Scalar, &kScalar};
#endif
}

State& state() {
  static State s = initial_state();
  return s;
}

}  // namespace

bool avx2_available() {
#if TATN_HAVE_AVX2_LANE
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend active() { return state().backend; }

const char* backend_name(Backend b) {
  return b == Backend::Avx2 ? "avx2" : "scalar";
}

bool set_backend(Backend b) {
#if TATN_HAVE_AVX2_LANE
  if (b == Backend::Avx2) {
    if (!avx2_available()) return false;
    state() = {Backend::Avx2, &kAvx2};
    return true;
  }
#else
  if (b == Backend::Avx2) return false;
#endif
  state() = {Backend::Scalar, &kScalar};
  return true;
}

void gemm(bool ta, bool tb, bool acc, int m, int n, int k, const float* a,
          const float* b, float* c) {
  state().table->gemm(ta, tb, acc, m, n, k, a, b, c);
}
void vadd(int n, const float* a, const float* b, float* out) {
  state().table->vadd(n, a, b, out);
}
void vsub(int n, const float* a, const float* b, float* out) {
  state().table->vsub(n, a, b, out);
}
void vmul(int n, const float* a, const float* b, float* out) {
  state().table->vmul(n, a, b, out);
}
void vaddc(int n, const float* a, float c, float* out) {
  state().table->vaddc(n, a, c, out);
}
void vscale(int n, const float* a, float c, float* out) {
  state().table->vscale(n, a, c, out);
}
void axpy(int n, float alpha, const float* x, float* y) {
  state().table->axpy(n, alpha, x, y);
}
void vexp(int n, const float* a, float* out) { state().table->vexp(n, a, out); }
void vtanh(int n, const float* a, float* out) {
  state().table->vtanh(n, a, out);
}
void vsigmoid(int n, const float* a, float* out) {
  state().table->vsigmoid(n, a, out);
}
float vsum(int n, const float* a) { return state().table->vsum(n, a); }
float vdot(int n, const float* a, const float* b) {
  return state().table->vdot(n, a, b);
}
float vmax(int n, const float* a) { return state().table->vmax(n, a); }

}  // namespace tatn::kern
