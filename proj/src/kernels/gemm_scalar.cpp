#include <cstring>

#include "kernels_impl.hpp"

namespace burstsr::kernels::detail {

// Reference GEMM, i-k-j order: B rows stream through cache and every output
// element accumulates its k-terms in ascending order, matching the SIMD
// variants' per-element order.
void gemm_scalar(int m, int n, int k, const double* a, const double* b,
                 double* c, bool accumulate) {
  if (!accumulate) std::memset(c, 0, sizeof(double) * m * n);
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<std::size_t>(i) * n;
    const double* ai = a + static_cast<std::size_t>(i) * k;
    for (int kk = 0; kk < k; ++kk) {
      const double av = ai[kk];
      const double* bk = b + static_cast<std::size_t>(kk) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bk[j];
    }
  }
}

}  // namespace burstsr::kernels::detail
