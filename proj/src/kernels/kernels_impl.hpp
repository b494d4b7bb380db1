#pragma once

#include <cstddef>

// Per-backend entry points. Each SIMD translation unit is compiled with its
// own -m flags and is only ever called after a runtime capability check.
namespace burstsr::kernels::detail {

void gemm_scalar(int m, int n, int k, const double* a, const double* b,
                 double* c, bool accumulate);
void relu_forward_scalar(const double* x, double* y, std::size_t n);
void relu_backward_scalar(const double* x, const double* g, double* gx,
                          std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void scale_scalar(double alpha, double* x, std::size_t n);
double sum_abs_diff_scalar(const double* a, const double* b, std::size_t n);
void adam_update_scalar(double* p, double* m, double* v, const double* g,
                        std::size_t n, double lr, double beta1, double beta2,
                        double eps, double bc1, double bc2);
void corr2d_scalar(const double* src, int src_w, const double* kern, int kh,
                   int kw, double* dst, int dh, int dw);

#if defined(__x86_64__) || defined(__i386__)
void gemm_avx2(int m, int n, int k, const double* a, const double* b,
               double* c, bool accumulate);
void gemm_avx512(int m, int n, int k, const double* a, const double* b,
                 double* c, bool accumulate);
void relu_forward_avx2(const double* x, double* y, std::size_t n);
void relu_backward_avx2(const double* x, const double* g, double* gx,
                        std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void scale_avx2(double alpha, double* x, std::size_t n);
double sum_abs_diff_avx2(const double* a, const double* b, std::size_t n);
void adam_update_avx2(double* p, double* m, double* v, const double* g,
                      std::size_t n, double lr, double beta1, double beta2,
                      double eps, double bc1, double bc2);
void corr2d_avx2(const double* src, int src_w, const double* kern, int kh,
                 int kw, double* dst, int dh, int dw);
#endif

#if defined(__aarch64__)
void gemm_neon(int m, int n, int k, const double* a, const double* b,
               double* c, bool accumulate);
#endif

}  // namespace burstsr::kernels::detail
