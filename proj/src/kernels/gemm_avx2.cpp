#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include <algorithm>
#include <cstring>
#include <vector>

#include "kernels_impl.hpp"

// Blocked GEMM with a 6x8 FMA micro-kernel (12 ymm accumulators). A and B
// are repacked into panel-major scratch so the inner loop runs on contiguous
// data; k ascends per output element in every path.
namespace burstsr::kernels::detail {
namespace {

constexpr int MR = 6;
constexpr int NR = 8;
constexpr int KC = 384;
constexpr int MC = 96;
constexpr int NC = 1024;

// ap: panel of up to MR rows, laid out ap[kk*MR + i], missing rows zeroed.
void pack_a_panel(const double* a, int lda, int mr, int kc, double* ap) {
  for (int kk = 0; kk < kc; ++kk) {
    for (int i = 0; i < mr; ++i) ap[kk * MR + i] = a[i * static_cast<std::size_t>(lda) + kk];
    for (int i = mr; i < MR; ++i) ap[kk * MR + i] = 0.0;
  }
}

// bp: panel of up to NR columns, laid out bp[kk*NR + j], missing cols zeroed.
void pack_b_panel(const double* b, int ldb, int nr, int kc, double* bp) {
  for (int kk = 0; kk < kc; ++kk) {
    const double* row = b + static_cast<std::size_t>(kk) * ldb;
    for (int j = 0; j < nr; ++j) bp[kk * NR + j] = row[j];
    for (int j = nr; j < NR; ++j) bp[kk * NR + j] = 0.0;
  }
}

// c is MR x NR with row stride ldc. zero_first drops the existing contents.
void micro_6x8(int kc, const double* ap, const double* bp, double* c, int ldc,
               bool zero_first) {
  __m256d acc[MR][2];
  if (zero_first) {
    for (int i = 0; i < MR; ++i) acc[i][0] = acc[i][1] = _mm256_setzero_pd();
  } else {
    for (int i = 0; i < MR; ++i) {
      acc[i][0] = _mm256_loadu_pd(c + i * static_cast<std::size_t>(ldc));
      acc[i][1] = _mm256_loadu_pd(c + i * static_cast<std::size_t>(ldc) + 4);
    }
  }
  for (int kk = 0; kk < kc; ++kk) {
    const __m256d b0 = _mm256_loadu_pd(bp + kk * NR);
    const __m256d b1 = _mm256_loadu_pd(bp + kk * NR + 4);
#pragma GCC unroll 6
    for (int i = 0; i < MR; ++i) {
      const __m256d ai = _mm256_set1_pd(ap[kk * MR + i]);
      acc[i][0] = _mm256_fmadd_pd(ai, b0, acc[i][0]);
      acc[i][1] = _mm256_fmadd_pd(ai, b1, acc[i][1]);
    }
  }
  for (int i = 0; i < MR; ++i) {
    _mm256_storeu_pd(c + i * static_cast<std::size_t>(ldc), acc[i][0]);
    _mm256_storeu_pd(c + i * static_cast<std::size_t>(ldc) + 4, acc[i][1]);
  }
}

// Partial tile: run the full micro-kernel into a local buffer (packs are
// zero-padded so that is safe), then merge the valid region.
void micro_edge(int kc, const double* ap, const double* bp, double* c, int ldc,
                int mr, int nr, bool zero_first) {
  double tmp[MR * NR];
  micro_6x8(kc, ap, bp, tmp, NR, true);
  for (int i = 0; i < mr; ++i)
    for (int j = 0; j < nr; ++j) {
      double& dst = c[i * static_cast<std::size_t>(ldc) + j];
      dst = zero_first ? tmp[i * NR + j] : dst + tmp[i * NR + j];
    }
}

}  // namespace

void gemm_avx2(int m, int n, int k, const double* a, const double* b,
               double* c, bool accumulate) {
  if (m <= 0 || n <= 0) return;
  if (k <= 0) {
    if (!accumulate) std::memset(c, 0, sizeof(double) * m * n);
    return;
  }
  thread_local std::vector<double> apack, bpack;
  apack.resize(static_cast<std::size_t>(MC) * KC);
  bpack.resize(static_cast<std::size_t>(KC) * NC);

  for (int jc = 0; jc < n; jc += NC) {
    const int nc = std::min(NC, n - jc);
    const int npanels = (nc + NR - 1) / NR;
    for (int pc = 0; pc < k; pc += KC) {
      const int kc = std::min(KC, k - pc);
      const bool zero_first = (pc == 0) && !accumulate;
      for (int jp = 0; jp < npanels; ++jp) {
        const int nr = std::min(NR, nc - jp * NR);
        pack_b_panel(b + static_cast<std::size_t>(pc) * n + jc + jp * NR, n,
                     nr, kc, bpack.data() + static_cast<std::size_t>(jp) * KC * NR);
      }
      for (int ic = 0; ic < m; ic += MC) {
        const int mc = std::min(MC, m - ic);
        const int mpanels = (mc + MR - 1) / MR;
        for (int ip = 0; ip < mpanels; ++ip) {
          const int mr = std::min(MR, mc - ip * MR);
          pack_a_panel(a + static_cast<std::size_t>(ic + ip * MR) * k + pc, k,
                       mr, kc, apack.data() + static_cast<std::size_t>(ip) * KC * MR);
        }
        for (int jp = 0; jp < npanels; ++jp) {
          const int nr = std::min(NR, nc - jp * NR);
          const double* bp = bpack.data() + static_cast<std::size_t>(jp) * KC * NR;
          for (int ip = 0; ip < mpanels; ++ip) {
            const int mr = std::min(MR, mc - ip * MR);
            const double* ap = apack.data() + static_cast<std::size_t>(ip) * KC * MR;
            double* ct = c + static_cast<std::size_t>(ic + ip * MR) * n + jc + jp * NR;
            if (mr == MR && nr == NR)
              micro_6x8(kc, ap, bp, ct, n, zero_first);
            else
              micro_edge(kc, ap, bp, ct, n, mr, nr, zero_first);
          }
        }
      }
    }
  }
}

}  // namespace burstsr::kernels::detail

#endif
