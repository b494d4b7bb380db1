#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include <algorithm>
#include <cstring>
#include <vector>

#include "kernels_impl.hpp"

// AVX-512 variant of the blocked GEMM: 12x16 micro-kernel, 24 zmm
// accumulators. Same packing layout and per-element k order as the AVX2
// kernel, just wider tiles.
namespace burstsr::kernels::detail {
namespace {

constexpr int MR = 12;
constexpr int NR = 16;
constexpr int KC = 384;
constexpr int MC = 144;
constexpr int NC = 2048;

void pack_a_panel(const double* a, int lda, int mr, int kc, double* ap) {
  for (int kk = 0; kk < kc; ++kk) {
    for (int i = 0; i < mr; ++i) ap[kk * MR + i] = a[i * static_cast<std::size_t>(lda) + kk];
    for (int i = mr; i < MR; ++i) ap[kk * MR + i] = 0.0;
  }
}

void pack_b_panel(const double* b, int ldb, int nr, int kc, double* bp) {
  for (int kk = 0; kk < kc; ++kk) {
    const double* row = b + static_cast<std::size_t>(kk) * ldb;
    for (int j = 0; j < nr; ++j) bp[kk * NR + j] = row[j];
    for (int j = nr; j < NR; ++j) bp[kk * NR + j] = 0.0;
  }
}

// ROWS x 16 register tile; the A panel stays padded to MR rows so the same
// packing serves every variant.
template <int ROWS>
void micro_16(int kc, const double* ap, const double* bp, double* c, int ldc,
              bool zero_first) {
  __m512d acc[ROWS][2];
  if (zero_first) {
    for (int i = 0; i < ROWS; ++i) acc[i][0] = acc[i][1] = _mm512_setzero_pd();
  } else {
    for (int i = 0; i < ROWS; ++i) {
      acc[i][0] = _mm512_loadu_pd(c + i * static_cast<std::size_t>(ldc));
      acc[i][1] = _mm512_loadu_pd(c + i * static_cast<std::size_t>(ldc) + 8);
    }
  }
  for (int kk = 0; kk < kc; ++kk) {
    const __m512d b0 = _mm512_loadu_pd(bp + kk * NR);
    const __m512d b1 = _mm512_loadu_pd(bp + kk * NR + 8);
#pragma GCC unroll 12
    for (int i = 0; i < ROWS; ++i) {
      const __m512d ai = _mm512_set1_pd(ap[kk * MR + i]);
      acc[i][0] = _mm512_fmadd_pd(ai, b0, acc[i][0]);
      acc[i][1] = _mm512_fmadd_pd(ai, b1, acc[i][1]);
    }
  }
  for (int i = 0; i < ROWS; ++i) {
    _mm512_storeu_pd(c + i * static_cast<std::size_t>(ldc), acc[i][0]);
    _mm512_storeu_pd(c + i * static_cast<std::size_t>(ldc) + 8, acc[i][1]);
  }
}

void micro_edge(int kc, const double* ap, const double* bp, double* c, int ldc,
                int mr, int nr, bool zero_first) {
  double tmp[MR * NR];
  micro_16<MR>(kc, ap, bp, tmp, NR, true);
  for (int i = 0; i < mr; ++i)
    for (int j = 0; j < nr; ++j) {
      double& dst = c[i * static_cast<std::size_t>(ldc) + j];
      dst = zero_first ? tmp[i * NR + j] : dst + tmp[i * NR + j];
    }
}

// Full-width tiles with fewer rows dodge the padded edge path; channel
// counts of 32 and 16 hit the 8- and 4-row cases constantly.
void micro_rows16(int kc, const double* ap, const double* bp, double* c,
                  int ldc, int mr, bool zero_first) {
  switch (mr) {
    case 4:
      micro_16<4>(kc, ap, bp, c, ldc, zero_first);
      return;
    case 8:
      micro_16<8>(kc, ap, bp, c, ldc, zero_first);
      return;
    default: {
      double tmp[MR * NR];
      micro_16<MR>(kc, ap, bp, tmp, NR, true);
      for (int i = 0; i < mr; ++i)
        for (int j = 0; j < NR; ++j) {
          double& dst = c[i * static_cast<std::size_t>(ldc) + j];
          dst = zero_first ? tmp[i * NR + j] : dst + tmp[i * NR + j];
        }
    }
  }
}

}  // namespace

void gemm_avx512(int m, int n, int k, const double* a, const double* b,
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
            if (nr == NR) {
              if (mr == MR)
                micro_16<MR>(kc, ap, bp, ct, n, zero_first);
              else
                micro_rows16(kc, ap, bp, ct, n, mr, zero_first);
            } else {
              micro_edge(kc, ap, bp, ct, n, mr, nr, zero_first);
            }
          }
        }
      }
    }
  }
}

}  // namespace burstsr::kernels::detail

#endif
