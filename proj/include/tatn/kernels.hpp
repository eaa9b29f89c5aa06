#ifndef TATN_KERNELS_HPP
#define TATN_KERNELS_HPP

// Dense float kernels behind the tensor ops: scalar reference
// implementations plus AVX2 variants selected at runtime (overridable via
// set_backend() or the TATN_KERNEL environment variable, values "scalar" /
// "avx2"). The two lanes are equivalence-tested against each other in
// tests/test_kernels.cpp.
//
// gemm convention: C (m x n) = op(A) (m x k) * op(B) (k x n), all buffers
// dense row-major; with trans_a the raw A buffer is k x m, with trans_b the
// raw B buffer is n x k. `acc` accumulates into C instead of overwriting.
//
// The double overloads are the 64-bit gradient-check path; they always use
// the scalar reference implementations.

namespace tatn::kern {

enum class Backend { Scalar, Avx2 };

Backend active();
bool set_backend(Backend b);  // false (and no change) if unsupported here
bool avx2_available();
const char* backend_name(Backend b);

// Dispatched float entry points.
void gemm(bool trans_a, bool trans_b, bool acc, int m, int n, int k,
          const float* a, const float* b, float* c);
void vadd(int n, const float* a, const float* b, float* out);
void vsub(int n, const float* a, const float* b, float* out);
void vmul(int n, const float* a, const float* b, float* out);
void vaddc(int n, const float* a, float c, float* out);
void vscale(int n, const float* a, float c, float* out);
void axpy(int n, float alpha, const float* x, float* y);
void vexp(int n, const float* a, float* out);
void vtanh(int n, const float* a, float* out);
void vsigmoid(int n, const float* a, float* out);
float vsum(int n, const float* a);
float vdot(int n, const float* a, const float* b);
float vmax(int n, const float* a);

// 64-bit overloads (scalar reference, no dispatch).
void gemm(bool trans_a, bool trans_b, bool acc, int m, int n, int k,
          const double* a, const double* b, double* c);
void vadd(int n, const double* a, const double* b, double* out);
void vsub(int n, const double* a, const double* b, double* out);
void vmul(int n, const double* a, const double* b, double* out);
void vaddc(int n, const double* a, double c, double* out);
void vscale(int n, const double* a, double c, double* out);
void axpy(int n, double alpha, const double* x, double* y);
void vexp(int n, const double* a, double* out);
void vtanh(int n, const double* a, double* out);
void vsigmoid(int n, const double* a, double* out);
double vsum(int n, const double* a);
double vdot(int n, const double* a, const double* b);
double vmax(int n, const double* a);

// Reference lane, directly callable (equivalence tests).
namespace scalar {
void gemm(bool trans_a, bool trans_b, bool acc, int m, int n, int k,
          const float* a, const float* b, float* c);
void vadd(int n, const float* a, const float* b, float* out);
void vsub(int n, const float* a, const float* b, float* out);
void vmul(int n, const float* a, const float* b, float* out);
void vaddc(int n, const float* a, float c, float* out);
void vscale(int n, const float* a, float c, float* out);
void axpy(int n, float alpha, const float* x, float* y);
void vexp(int n, const float* a, float* out);
void vtanh(int n, const float* a, float* out);
void vsigmoid(int n, const float* a, float* out);
float vsum(int n, const float* a);
float vdot(int n, const float* a, const float* b);
float vmax(int n, const float* a);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define TATN_HAVE_AVX2_LANE 1
namespace avx2 {
void gemm(bool trans_a, bool trans_b, bool acc, int m, int n, int k,
          const float* a, const float* b, float* c);
void vadd(int n, const float* a, const float* b, float* out);
void vsub(int n, const float* a, const float* b, float* out);
void vmul(int n, const float* a, const float* b, float* out);
void vaddc(int n, const float* a, float c, float* out);
void vscale(int n, const float* a, float c, float* out);
void axpy(int n, float alpha, const float* x, float* y);
void vexp(int n, const float* a, float* out);
void vtanh(int n, const float* a, float* out);
void vsigmoid(int n, const float* a, float* out);
float vsum(int n, const float* a);
float vdot(int n, const float* a, const float* b);
float vmax(int n, const float* a);
}  // namespace avx2
#else
#define TATN_HAVE_AVX2_LANE 0
#endif

}  // namespace tatn::kern

#endif
