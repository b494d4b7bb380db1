#include "kernels_impl.hpp"

namespace burstsr::kernels::detail {

void corr2d_scalar(const double* src, int src_w, const double* kern, int kh,
                   int kw, double* dst, int dh, int dw) {
  for (int y = 0; y < dh; ++y)
    for (int x = 0; x < dw; ++x) {
      double s = 0.0;
      for (int ky = 0; ky < kh; ++ky) {
        const double* row = src + static_cast<std::size_t>(y + ky) * src_w + x;
        const double* kr = kern + static_cast<std::size_t>(ky) * kw;
        for (int kx = 0; kx < kw; ++kx) s += kr[kx] * row[kx];
      }
      dst[static_cast<std::size_t>(y) * dw + x] = s;
    }
}

}  // namespace burstsr::kernels::detail
