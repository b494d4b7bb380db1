#include "burstsr/fft.hpp"

#include <cmath>

#include "burstsr/common.hpp"

namespace burstsr::fft {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

bool is_pow2(std::size_t n) { return n && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Iterative Cooley-Tukey, n a power of two. No scaling.
void fft_pow2(std::vector<cd>& x, bool inverse) {
  const std::size_t n = x.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
    const cd wlen = std::polar(1.0, ang);
    for (std::size_t i = 0; i < n; i += len) {
      cd w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const cd u = x[i + j];
        const cd v = x[i + j + len / 2] * w;
        x[i + j] = u + v;
        x[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// Bluestein's algorithm: arbitrary-n DFT as a pow2 convolution with a chirp.
void fft_bluestein(std::vector<cd>& x, bool inverse) {
  const std::size_t n = x.size();
  const std::size_t m = next_pow2(2 * n - 1);
  const double sign = inverse ? 1.0 : -1.0;

  std::vector<cd> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the angle argument small for large n
    const std::size_t k2 = (k * k) % (2 * n);
    chirp[k] = std::polar(1.0, sign * kPi * static_cast<double>(k2) /
                                   static_cast<double>(n));
  }
  std::vector<cd> a(m, cd(0.0, 0.0)), b(m, cd(0.0, 0.0));
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);

  fft_pow2(a, false);
  fft_pow2(b, false);
  for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
  fft_pow2(a, true);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * chirp[k] * inv_m;
}

}  // namespace

void fft_inplace(std::vector<cd>& x, bool inverse) {
  const std::size_t n = x.size();
  require_arg(n >= 1, "fft: empty input");
  if (n == 1) return;
  if (is_pow2(n))
    fft_pow2(x, inverse);
  else
    fft_bluestein(x, inverse);
  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (cd& v : x) v *= inv_n;
  }
}

void fft2d_inplace(std::vector<cd>& a, int h, int w, bool inverse) {
  require_arg(h >= 1 && w >= 1 &&
                  a.size() == static_cast<std::size_t>(h) * w,
              "fft2d: shape mismatch");
  std::vector<cd> col(h);
  for (int y = 0; y < h; ++y) {
    std::vector<cd> row(a.begin() + static_cast<std::size_t>(y) * w,
                        a.begin() + static_cast<std::size_t>(y + 1) * w);
    fft_inplace(row, inverse);
    std::copy(row.begin(), row.end(),
              a.begin() + static_cast<std::size_t>(y) * w);
  }
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) col[y] = a[static_cast<std::size_t>(y) * w + x];
    fft_inplace(col, inverse);
    for (int y = 0; y < h; ++y) a[static_cast<std::size_t>(y) * w + x] = col[y];
  }
}

}  // namespace burstsr::fft
