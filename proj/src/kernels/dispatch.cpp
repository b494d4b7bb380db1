#include "burstsr/kernels.hpp"

#include <cstdlib>
#include <string>

#include "burstsr/common.hpp"
#include "kernels_impl.hpp"

namespace burstsr::kernels {
namespace {

struct Ops {
  void (*gemm)(int, int, int, const double*, const double*, double*, bool);
  void (*relu_forward)(const double*, double*, std::size_t);
  void (*relu_backward)(const double*, const double*, double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double, double*, std::size_t);
  double (*sum_abs_diff)(const double*, const double*, std::size_t);
  void (*adam_update)(double*, double*, double*, const double*, std::size_t,
                      double, double, double, double, double, double);
  void (*corr2d)(const double*, int, const double*, int, int, double*, int,
                 int);
};

constexpr Ops scalar_ops = {
    detail::gemm_scalar,         detail::relu_forward_scalar,
    detail::relu_backward_scalar, detail::axpy_scalar,
    detail::scale_scalar,        detail::sum_abs_diff_scalar,
    detail::adam_update_scalar,  detail::corr2d_scalar,
};

#if defined(__x86_64__) || defined(__i386__)
constexpr Ops avx2_ops = {
    detail::gemm_avx2,         detail::relu_forward_avx2,
    detail::relu_backward_avx2, detail::axpy_avx2,
    detail::scale_avx2,        detail::sum_abs_diff_avx2,
    detail::adam_update_avx2,  detail::corr2d_avx2,
};
// AVX-512 gets its own GEMM; the pointwise loops stay AVX2 (they are
// memory-bound and every AVX-512F CPU also has AVX2).
constexpr Ops avx512_ops = {
    detail::gemm_avx512,       detail::relu_forward_avx2,
    detail::relu_backward_avx2, detail::axpy_avx2,
    detail::scale_avx2,        detail::sum_abs_diff_avx2,
    detail::adam_update_avx2,  detail::corr2d_avx2,
};
#endif

#if defined(__aarch64__)
constexpr Ops neon_ops = {
    detail::gemm_neon,           detail::relu_forward_scalar,
    detail::relu_backward_scalar, detail::axpy_scalar,
    detail::scale_scalar,        detail::sum_abs_diff_scalar,
    detail::adam_update_scalar,  detail::corr2d_scalar,
};
#endif

Backend detect_best() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx512f") && __builtin_cpu_supports("avx2") &&
      __builtin_cpu_supports("fma"))
    return Backend::avx512;
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return Backend::avx2;
  return Backend::scalar;
#elif defined(__aarch64__)
  return Backend::neon;
#else
  return Backend::scalar;
#endif
}

Backend parse_backend(const std::string& s) {
  if (s == "scalar") return Backend::scalar;
  if (s == "avx2") return Backend::avx2;
  if (s == "avx512") return Backend::avx512;
  if (s == "neon") return Backend::neon;
  throw Error(ErrorCode::invalid_argument,
              "BURSTSR_KERNEL: unknown backend '" + s +
                  "' (expected scalar|avx2|avx512|neon)");
}

Backend resolve_initial() {
  if (const char* e = std::getenv("BURSTSR_KERNEL"); e && *e) {
    Backend b = parse_backend(e);
    require(backend_supported(b), ErrorCode::invalid_argument,
            std::string("BURSTSR_KERNEL: backend '") + backend_name(b) +
                "' not supported on this machine");
    return b;
  }
  return detect_best();
}

Backend& current() {
  static Backend b = resolve_initial();
  return b;
}

const Ops& ops() {
  switch (current()) {
#if defined(__x86_64__) || defined(__i386__)
    case Backend::avx2:
      return avx2_ops;
    case Backend::avx512:
      return avx512_ops;
#endif
#if defined(__aarch64__)
    case Backend::neon:
      return neon_ops;
#endif
    default:
      return scalar_ops;
  }
}

}  // namespace

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::avx512:
      return "avx512";
    case Backend::neon:
      return "neon";
  }
  return "?";
}

bool backend_supported(Backend b) {
  if (b == Backend::scalar) return true;
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  if (b == Backend::avx2)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  if (b == Backend::avx512)
    return __builtin_cpu_supports("avx512f") &&
           __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#endif
#if defined(__aarch64__)
  if (b == Backend::neon) return true;
#endif
  return false;
}

Backend active_backend() { return current(); }

void set_backend(Backend b) {
  require(backend_supported(b), ErrorCode::invalid_argument,
          std::string("backend '") + backend_name(b) +
              "' not supported on this machine");
  current() = b;
}

void gemm(int m, int n, int k, const double* a, const double* b, double* c,
          bool accumulate) {
  ops().gemm(m, n, k, a, b, c, accumulate);
}
void relu_forward(const double* x, double* y, std::size_t n) {
  ops().relu_forward(x, y, n);
}
void relu_backward(const double* x, const double* g, double* gx,
                   std::size_t n) {
  ops().relu_backward(x, g, gx, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  ops().axpy(alpha, x, y, n);
}
void scale(double alpha, double* x, std::size_t n) { ops().scale(alpha, x, n); }
double sum_abs_diff(const double* a, const double* b, std::size_t n) {
  return ops().sum_abs_diff(a, b, n);
}
void adam_update(double* p, double* m, double* v, const double* g,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double bc1, double bc2) {
  ops().adam_update(p, m, v, g, n, lr, beta1, beta2, eps, bc1, bc2);
}
void corr2d_valid(const double* src, int src_w, const double* kern, int kh,
                  int kw, double* dst, int dh, int dw) {
  ops().corr2d(src, src_w, kern, kh, kw, dst, dh, dw);
}

}  // namespace burstsr::kernels
