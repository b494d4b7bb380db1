#if defined(__aarch64__)

#include <arm_neon.h>

#include <cstring>

#include "kernels_impl.hpp"

namespace burstsr::kernels::detail {

// Straightforward NEON i-k-j kernel (float64x2 row vectors). Keeps the same
// per-element k order as the scalar reference; tuned blocking is an x86
// concern here since that is where the heavy paths run.
void gemm_neon(int m, int n, int k, const double* a, const double* b,
               double* c, bool accumulate) {
  if (!accumulate) std::memset(c, 0, sizeof(double) * m * n);
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<std::size_t>(i) * n;
    const double* ai = a + static_cast<std::size_t>(i) * k;
    for (int kk = 0; kk < k; ++kk) {
      const float64x2_t av = vdupq_n_f64(ai[kk]);
      const double* bk = b + static_cast<std::size_t>(kk) * n;
      int j = 0;
      for (; j + 2 <= n; j += 2)
        vst1q_f64(ci + j, vfmaq_f64(vld1q_f64(ci + j), av, vld1q_f64(bk + j)));
      for (; j < n; ++j) ci[j] += ai[kk] * bk[j];
    }
  }
}

}  // namespace burstsr::kernels::detail

#endif
