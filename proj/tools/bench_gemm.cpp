// Times the GEMM kernel on the shapes that dominate training, per backend.
#include <chrono>
#include <cstdio>
#include <vector>

#include "burstsr/common.hpp"
#include "burstsr/kernels.hpp"

using burstsr::Rng;
namespace k = burstsr::kernels;

int main() {
  struct Shape {
    int m, n, k;
    const char* note;
  };
  const Shape shapes[] = {
      {32, 4096, 288, "conv fwd, 64x64 plane"},
      {32, 1024, 288, "conv fwd, 32x32 plane"},
      {288, 4096, 32, "conv grad-input"},
      {32, 288, 4096, "conv grad-weight"},
      {384, 384, 384, "square"},
  };
  const k::Backend candidates[] = {k::Backend::scalar, k::Backend::avx2,
                                   k::Backend::avx512, k::Backend::neon};

  Rng rng(7);
  for (k::Backend b : candidates) {
    if (!k::backend_supported(b)) continue;
    k::set_backend(b);
    std::printf("backend %s\n", k::backend_name(b));
    for (const Shape& s : shapes) {
      std::vector<double> a(static_cast<std::size_t>(s.m) * s.k);
      std::vector<double> bb(static_cast<std::size_t>(s.k) * s.n);
      std::vector<double> c(static_cast<std::size_t>(s.m) * s.n);
      for (double& x : a) x = rng.uniform(-1.0, 1.0);
      for (double& x : bb) x = rng.uniform(-1.0, 1.0);

      const double flop = 2.0 * s.m * s.n * s.k;
      // warm-up
      k::gemm(s.m, s.n, s.k, a.data(), bb.data(), c.data(), false);
      int reps = 1;
      double elapsed = 0.0;
      for (;;) {
        auto t0 = std::chrono::steady_clock::now();
        for (int r = 0; r < reps; ++r)
          k::gemm(s.m, s.n, s.k, a.data(), bb.data(), c.data(), false);
        elapsed = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
        if (elapsed > 0.25 || reps > 1 << 20) break;
        reps *= 4;
      }
      std::printf("  %4dx%4dx%4d  %6.2f GF/s   (%s)\n", s.m, s.n, s.k,
                  flop * reps / elapsed / 1e9, s.note);
    }
  }
  return 0;
}
