#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace burstsr::kernels::detail {

// Vectorized over output columns, four at a time; taps accumulate in the
// same ascending order as the scalar kernel.
void corr2d_avx2(const double* src, int src_w, const double* kern, int kh,
                 int kw, double* dst, int dh, int dw) {
  for (int y = 0; y < dh; ++y) {
    int x = 0;
    for (; x + 4 <= dw; x += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (int ky = 0; ky < kh; ++ky) {
        const double* row = src + static_cast<std::size_t>(y + ky) * src_w + x;
        const double* kr = kern + static_cast<std::size_t>(ky) * kw;
        for (int kx = 0; kx < kw; ++kx)
          acc = _mm256_fmadd_pd(_mm256_set1_pd(kr[kx]),
                                _mm256_loadu_pd(row + kx), acc);
      }
      _mm256_storeu_pd(dst + static_cast<std::size_t>(y) * dw + x, acc);
    }
    for (; x < dw; ++x) {
      double s = 0.0;
      for (int ky = 0; ky < kh; ++ky) {
        const double* row = src + static_cast<std::size_t>(y + ky) * src_w + x;
        const double* kr = kern + static_cast<std::size_t>(ky) * kw;
        for (int kx = 0; kx < kw; ++kx) s += kr[kx] * row[kx];
      }
      dst[static_cast<std::size_t>(y) * dw + x] = s;
    }
  }
}

}  // namespace burstsr::kernels::detail

#endif
