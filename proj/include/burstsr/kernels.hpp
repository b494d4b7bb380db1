#pragma once

#include <cstddef>
#include <string>

namespace burstsr::kernels {

// Data-parallel inner loops have a scalar reference implementation and SIMD
// variants selected at runtime. All variants of a kernel accumulate in the
// same index order per output element, so results agree to rounding
// differences only (FMA contraction); the equivalence tests pin that down.
enum class Backend { scalar, avx2, avx512, neon };

const char* backend_name(Backend b);
bool backend_supported(Backend b);

// Highest supported backend, honoring the BURSTSR_KERNEL env override
// (scalar|avx2|avx512|neon). Resolved once per process.
Backend active_backend();

// Test hook: force a backend for subsequent kernel calls. Throws if the
// backend is not supported on this machine.
void set_backend(Backend b);

// Row-major C[M,N] (+)= A[M,K] * B[K,N]. K-loop ascending per element.
void gemm(int m, int n, int k, const double* a, const double* b, double* c,
          bool accumulate);

// y[i] = max(x[i], 0)
void relu_forward(const double* x, double* y, std::size_t n);
// gx[i] = x[i] > 0 ? g[i] : 0
void relu_backward(const double* x, const double* g, double* gx,
                   std::size_t n);
// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);
// x *= alpha
void scale(double alpha, double* x, std::size_t n);
// sum_i |a[i] - b[i]|
double sum_abs_diff(const double* a, const double* b, std::size_t n);

// Fused Adam update with bias correction baked into bc1 = 1/(1-beta1^t),
// bc2 = 1/(1-beta2^t). Elementwise, so SIMD variants are bit-identical to
// the scalar path.
void adam_update(double* p, double* m, double* v, const double* g,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double bc1, double bc2);

// Valid 2-D correlation of a padded plane: dst[y][x] =
// sum_{ky,kx} k[ky*kw+kx] * src[(y+ky)*src_w + (x+kx)], tap order ascending.
void corr2d_valid(const double* src, int src_w, const double* kern, int kh,
                  int kw, double* dst, int dh, int dw);

}  // namespace burstsr::kernels
