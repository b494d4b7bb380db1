#pragma once

#include <complex>
#include <vector>

namespace burstsr::fft {

using cd = std::complex<double>;

// In-place DFT for any n >= 1 (radix-2 when n is a power of two, Bluestein
// otherwise). Inverse applies the 1/n scale.
void fft_inplace(std::vector<cd>& x, bool inverse = false);

// Row-major h*w grid, transformed along rows then columns.
void fft2d_inplace(std::vector<cd>& a, int h, int w, bool inverse = false);

}  // namespace burstsr::fft
