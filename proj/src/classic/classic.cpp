#include "burstsr/classic_sr.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "burstsr/common.hpp"
#include "burstsr/fft.hpp"
#include "burstsr/splat.hpp"

namespace burstsr::classic {

using imaging::Burst;
using imaging::Psf;
using cd = std::complex<double>;

namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Half-sample symmetric extension (…, a1, a0 | a0, a1, …), period 2n.
int mirror_index(int i, int n) {
  if (n == 1) return 0;
  const int p = 2 * n;
  int m = i % p;
  if (m < 0) m += p;
  return m < n ? m : p - 1 - m;
}

Raster channel_mean(const Raster& r) {
  if (r.channels == 1) return r;
  Raster out(r.height, r.width, 1);
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x) {
      double sum = 0.0;
      for (int c = 0; c < r.channels; ++c) sum += r.at(y, x, c);
      out.at(y, x) = sum / r.channels;
    }
  return out;
}

bool is_flat(const Raster& r) {
  double lo = r.data[0], hi = r.data[0];
  for (double v : r.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo <= 1e-12 * std::max(1.0, std::fabs(hi));
}

// Fills uncovered pixels from the nearest covered neighbors along the row and
// the column (linear interpolation per axis, the two axes averaged). Reads
// covered values only, so the result is independent of hole visit order.
void infill_holes(Raster& img, const std::vector<unsigned char>& covered) {
  const int H = img.height, W = img.width, C = img.channels;
  std::vector<double> fallback(C, 0.0);
  long long n_cov = 0;
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      if (covered[static_cast<std::size_t>(y) * W + x]) {
        ++n_cov;
        for (int c = 0; c < C; ++c) fallback[c] += img.at(y, x, c);
      }
  for (int c = 0; c < C; ++c) fallback[c] /= static_cast<double>(n_cov);

  auto cov = [&](int y, int x) {
    return covered[static_cast<std::size_t>(y) * W + x] != 0;
  };
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      if (cov(y, x)) continue;
      int xl = -1, xr = -1, yu = -1, yd = -1;
      for (int i = x - 1; i >= 0; --i)
        if (cov(y, i)) {
          xl = i;
          break;
        }
      for (int i = x + 1; i < W; ++i)
        if (cov(y, i)) {
          xr = i;
          break;
        }
      for (int i = y - 1; i >= 0; --i)
        if (cov(i, x)) {
          yu = i;
          break;
        }
      for (int i = y + 1; i < H; ++i)
        if (cov(i, x)) {
          yd = i;
          break;
        }
      for (int c = 0; c < C; ++c) {
        double sum = 0.0;
        int n_est = 0;
        if (xl >= 0 && xr >= 0) {
          const double t = static_cast<double>(x - xl) / (xr - xl);
          sum += (1.0 - t) * img.at(y, xl, c) + t * img.at(y, xr, c);
          ++n_est;
        } else if (xl >= 0 || xr >= 0) {
          sum += img.at(y, xl >= 0 ? xl : xr, c);
          ++n_est;
        }
        if (yu >= 0 && yd >= 0) {
          const double t = static_cast<double>(y - yu) / (yd - yu);
          sum += (1.0 - t) * img.at(yu, x, c) + t * img.at(yd, x, c);
          ++n_est;
        } else if (yu >= 0 || yd >= 0) {
          sum += img.at(yu >= 0 ? yu : yd, x, c);
          ++n_est;
        }
        img.at(y, x, c) = n_est > 0 ? sum / n_est : fallback[c];
      }
    }
}

// Catmull-Rom kernel (a = -1/2), support (-2, 2), interpolating.
double catmull_rom(double t) {
  t = std::fabs(t);
  if (t <= 1.0) return ((1.5 * t - 2.5) * t) * t + 1.0;
  if (t < 2.0) return ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0;
  return 0.0;
}

}  // namespace

Translation estimate_translation(const Raster& ref, const Raster& frame,
                                 bool subpixel_refine) {
  require_arg(ref.height == frame.height && ref.width == frame.width &&
                  ref.channels == frame.channels,
              "estimate_translation: images must share shape");
  require_arg(ref.height >= 2 && ref.width >= 2,
              "estimate_translation: image too small to correlate");
  const Raster a = channel_mean(ref);
  const Raster b = channel_mean(frame);
  require(!is_flat(a) && !is_flat(b), ErrorCode::no_signal,
          "estimate_translation: constant image carries no motion signal");

  const int H = a.height, W = a.width;
  const std::size_t Hp = next_pow2(static_cast<std::size_t>(H));
  const std::size_t Wp = next_pow2(static_cast<std::size_t>(W));

  double mean_a = 0.0, mean_b = 0.0;
  for (double v : a.data) mean_a += v;
  for (double v : b.data) mean_b += v;
  mean_a /= a.data.size();
  mean_b /= b.data.size();

  std::vector<double> wy(H), wx(W);
  for (int y = 0; y < H; ++y)
    wy[y] = 0.5 - 0.5 * std::cos(2.0 * M_PI * y / (H - 1));
  for (int x = 0; x < W; ++x)
    wx[x] = 0.5 - 0.5 * std::cos(2.0 * M_PI * x / (W - 1));

  std::vector<cd> A(Hp * Wp, cd(0, 0)), B(Hp * Wp, cd(0, 0));
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const double w = wy[y] * wx[x];
      A[y * Wp + x] = cd((a.at(y, x) - mean_a) * w, 0.0);
      B[y * Wp + x] = cd((b.at(y, x) - mean_b) * w, 0.0);
    }
  fft::fft2d_inplace(A, Hp, Wp, false);
  fft::fft2d_inplace(B, Hp, Wp, false);

  // Normalized cross-power, tapered toward Nyquist so the correlation peak is
  // a smooth bump a quadratic fits well, instead of a one-bin sinc spike.
  std::vector<cd> C(Hp * Wp);
  double max_mag = 0.0;
  for (std::size_t i = 0; i < C.size(); ++i) {
    C[i] = A[i] * std::conj(B[i]);
    max_mag = std::max(max_mag, std::abs(C[i]));
  }
  const double eps = 1e-9 * max_mag + 1e-300;
  for (std::size_t ky = 0; ky < Hp; ++ky) {
    const double ly = 0.5 + 0.5 * std::cos(2.0 * M_PI * ky / Hp);
    for (std::size_t kx = 0; kx < Wp; ++kx) {
      const double lx = 0.5 + 0.5 * std::cos(2.0 * M_PI * kx / Wp);
      cd& v = C[ky * Wp + kx];
      v = v / (std::abs(v) + eps) * (ly * lx);
    }
  }
  const std::vector<cd> Cf = subpixel_refine ? C : std::vector<cd>{};
  fft::fft2d_inplace(C, Hp, Wp, true);

  std::size_t peak = 0;
  double best = C[0].real();
  for (std::size_t i = 1; i < C.size(); ++i)
    if (C[i].real() > best) {
      best = C[i].real();
      peak = i;
    }
  const long py = static_cast<long>(peak / Wp);
  const long px = static_cast<long>(peak % Wp);
  double dy = static_cast<double>(py <= static_cast<long>(Hp) / 2
                                      ? py
                                      : py - static_cast<long>(Hp));
  double dx = static_cast<double>(px <= static_cast<long>(Wp) / 2
                                      ? px
                                      : px - static_cast<long>(Wp));
  if (!subpixel_refine) return {dx, dy};

  // The correlation surface is a band-limited trigonometric polynomial, so it
  // can be evaluated between grid points straight from the cross-power
  // spectrum. Quadratic fits around the peak at a shrinking step converge on
  // the continuous maximum without the single-fit bin bias.
  std::vector<cd> ey(Hp), ex(Wp);
  auto surf_at = [&](double ty, double tx) {
    for (std::size_t ky = 0; ky < Hp; ++ky) {
      const double f = ky <= Hp / 2 ? static_cast<double>(ky)
                                    : static_cast<double>(ky) - Hp;
      ey[ky] = std::polar(1.0, 2.0 * M_PI * f * ty / Hp);
    }
    for (std::size_t kx = 0; kx < Wp; ++kx) {
      const double f = kx <= Wp / 2 ? static_cast<double>(kx)
                                    : static_cast<double>(kx) - Wp;
      ex[kx] = std::polar(1.0, 2.0 * M_PI * f * tx / Wp);
    }
    cd acc(0, 0);
    for (std::size_t ky = 0; ky < Hp; ++ky) {
      cd row(0, 0);
      const cd* line = &Cf[ky * Wp];
      for (std::size_t kx = 0; kx < Wp; ++kx) row += line[kx] * ex[kx];
      acc += ey[ky] * row;
    }
    return acc.real();
  };
  auto vertex = [](double cm, double c0, double cp) {
    const double denom = cm - 2.0 * c0 + cp;
    if (!(denom < -1e-300)) return 0.0;
    return std::clamp(0.5 * (cm - cp) / denom, -1.0, 1.0);
  };
  double h = 0.5;
  for (int it = 0; it < 4; ++it) {
    dx += h * vertex(surf_at(dy, dx - h), surf_at(dy, dx), surf_at(dy, dx + h));
    dy += h * vertex(surf_at(dy - h, dx), surf_at(dy, dx), surf_at(dy + h, dx));
    h *= 0.5;
  }
  return {dx, dy};
}

std::pair<Raster, Raster> shift_and_add(const Burst& burst,
                                        const std::vector<FlowField>& flows,
                                        int s) {
  require_arg(s >= 1, "shift_and_add: s must be >= 1");
  require(!burst.frames.empty(), ErrorCode::empty_input,
          "shift_and_add: burst has no frames");
  const int T = burst.frame_count();
  require_arg(static_cast<int>(flows.size()) == T,
              "shift_and_add: one flow per frame");
  const Raster& f0 = burst.frames[0];
  for (int k = 0; k < T; ++k) {
    const Raster& fr = burst.frames[k];
    require_arg(fr.height == f0.height && fr.width == f0.width &&
                    fr.channels == f0.channels,
                "shift_and_add: frames must share shape");
    require_arg(flows[k].height == f0.height && flows[k].width == f0.width,
                "shift_and_add: flow shape mismatch");
  }
  require_arg(flows[0].is_zero(), "shift_and_add: reference flow must be zero");

  const int Hh = f0.height * s, Wh = f0.width * s, C = f0.channels;
  std::vector<fuse::FrameKey> keys(static_cast<std::size_t>(T));
  for (int k = 0; k < T; ++k)
    keys[k] = {flows[k].data.data(), flows[k].data.size() * sizeof(double),
               burst.frames[k].data.data(),
               burst.frames[k].data.size() * sizeof(double)};
  const std::vector<int> order = fuse::canonical_order(keys);

  Raster acc(Hh, Wh, C);
  Raster wacc(Hh, Wh, 1);
  for (int k : order) {
    const Raster& fr = burst.frames[k];
    const FlowField& fl = flows[k];
    for (int y = 0; y < f0.height; ++y)
      for (int x = 0; x < f0.width; ++x) {
        const double hy = s * (y + fl.v(y, x));
        const double hx = s * (x + fl.u(y, x));
        const fuse::Corners cs = fuse::splat_corners(hy, hx, Hh, Wh);
        const double* src =
            fr.data.data() + (static_cast<std::size_t>(y) * fr.width + x) * C;
        for (int i = 0; i < cs.n; ++i) {
          double* dst = &acc.at(cs.y[i], cs.x[i], 0);
          const double w = cs.w[i];
          for (int c = 0; c < C; ++c) dst[c] += w * src[c];
          wacc.at(cs.y[i], cs.x[i]) += w;
        }
      }
  }

  const double eps = 1e-8;
  Raster out(Hh, Wh, C);
  Raster wmap(Hh, Wh, 1);
  std::vector<unsigned char> covered(static_cast<std::size_t>(Hh) * Wh, 0);
  bool any = false;
  for (int y = 0; y < Hh; ++y)
    for (int x = 0; x < Wh; ++x) {
      const double w = wacc.at(y, x);
      if (w > eps) {
        covered[static_cast<std::size_t>(y) * Wh + x] = 1;
        any = true;
        const double* src = &acc.at(y, x, 0);
        double* dst = &out.at(y, x, 0);
        for (int c = 0; c < C; ++c) dst[c] = src[c] / w;
        wmap.at(y, x) = w;
      }
    }
  require(any, ErrorCode::empty_input,
          "shift_and_add: no pixel received any sample weight");
  infill_holes(out, covered);
  if (f0.pixel_size_m) {
    out.pixel_size_m = *f0.pixel_size_m / s;
    wmap.pixel_size_m = out.pixel_size_m;
  }
  return {std::move(out), std::move(wmap)};
}

std::pair<Raster, Raster> shift_and_add(const Burst& burst,
                                        const std::vector<Translation>& shifts,
                                        int s) {
  require(!burst.frames.empty(), ErrorCode::empty_input,
          "shift_and_add: burst has no frames");
  const Raster& f0 = burst.frames[0];
  std::vector<FlowField> flows;
  flows.reserve(shifts.size());
  for (const auto& [dx, dy] : shifts)
    flows.push_back(FlowField::uniform(f0.height, f0.width, dx, dy));
  return shift_and_add(burst, flows, s);
}

Raster deblur_wiener(const Raster& image, const Psf& psf, double nsr) {
  require_arg(nsr >= 0.0, "deblur_wiener: nsr must be >= 0");
  const int H = image.height, W = image.width, C = image.channels;
  const int pmin = std::max(8, 2 * psf.radius);
  const std::size_t Hp = next_pow2(static_cast<std::size_t>(H + 2 * pmin));
  const std::size_t Wp = next_pow2(static_cast<std::size_t>(W + 2 * pmin));
  const int py = static_cast<int>((Hp - H) / 2);
  const int px = static_cast<int>((Wp - W) / 2);

  std::vector<cd> otf(Hp * Wp, cd(0, 0));
  const int r = psf.radius;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      const std::size_t yy =
          static_cast<std::size_t>((dy % static_cast<int>(Hp) + Hp)) % Hp;
      const std::size_t xx =
          static_cast<std::size_t>((dx % static_cast<int>(Wp) + Wp)) % Wp;
      otf[yy * Wp + xx] += psf.tap(dy, dx);
    }
  fft::fft2d_inplace(otf, Hp, Wp, false);

  Raster out(H, W, C);
  out.pixel_size_m = image.pixel_size_m;
  std::vector<cd> buf(Hp * Wp);
  for (int c = 0; c < C; ++c) {
    for (std::size_t Y = 0; Y < Hp; ++Y) {
      const int sy = mirror_index(static_cast<int>(Y) - py, H);
      for (std::size_t X = 0; X < Wp; ++X) {
        const int sx = mirror_index(static_cast<int>(X) - px, W);
        buf[Y * Wp + X] = cd(image.at(sy, sx, c), 0.0);
      }
    }
    fft::fft2d_inplace(buf, Hp, Wp, false);
    for (std::size_t i = 0; i < buf.size(); ++i) {
      const cd h = otf[i];
      buf[i] *= std::conj(h) / (std::norm(h) + nsr);
    }
    fft::fft2d_inplace(buf, Hp, Wp, true);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x)
        out.at(y, x, c) = buf[(y + py) * Wp + (x + px)].real();
  }
  return out;
}

Raster bicubic_upsample(const Raster& image, int s) {
  require_arg(s >= 1, "bicubic_upsample: s must be >= 1");
  if (s == 1) return image;
  const int H = image.height, W = image.width, C = image.channels;
  Raster out(H * s, W * s, C);
  if (image.pixel_size_m) out.pixel_size_m = *image.pixel_size_m / s;
  for (int Y = 0; Y < H * s; ++Y) {
    const double sy = static_cast<double>(Y) / s;
    const int y0 = static_cast<int>(std::floor(sy));
    const double fy = sy - y0;
    double ky[4];
    for (int j = 0; j < 4; ++j) ky[j] = catmull_rom(fy - (j - 1));
    for (int X = 0; X < W * s; ++X) {
      const double sx = static_cast<double>(X) / s;
      const int x0 = static_cast<int>(std::floor(sx));
      const double fx = sx - x0;
      double kx[4];
      for (int i = 0; i < 4; ++i) kx[i] = catmull_rom(fx - (i - 1));
      for (int c = 0; c < C; ++c) {
        double acc = 0.0;
        for (int j = 0; j < 4; ++j) {
          const int yy = std::clamp(y0 + j - 1, 0, H - 1);
          double row = 0.0;
          for (int i = 0; i < 4; ++i) {
            const int xx = std::clamp(x0 + i - 1, 0, W - 1);
            row += kx[i] * image.at(yy, xx, c);
          }
          acc += ky[j] * row;
        }
        out.at(Y, X, c) = acc;
      }
    }
  }
  return out;
}

Raster classic_sr(const Burst& burst, int s, const ClassicParams& params) {
  require_arg(s >= 1, "classic_sr: s must be >= 1");
  require_arg(params.wiener_nsr >= 0.0, "classic_sr: wiener_nsr must be >= 0");
  require_arg(params.splat_radius == 1,
              "classic_sr: only the bilinear radius-1 splat is supported");
  require(!burst.frames.empty(), ErrorCode::empty_input,
          "classic_sr: burst has no frames");

  const int T = burst.frame_count();
  std::vector<FlowField> flows;
  if (burst.true_flows) {
    require_arg(static_cast<int>(burst.true_flows->size()) == T,
                "classic_sr: one true flow per frame");
    flows = *burst.true_flows;
  } else {
    const Raster& ref = burst.frames[burst.reference_index];
    flows.reserve(static_cast<std::size_t>(T));
    for (int k = 0; k < T; ++k) {
      if (k == burst.reference_index) {
        flows.emplace_back(ref.height, ref.width);
        continue;
      }
      const auto [dx, dy] =
          estimate_translation(ref, burst.frames[k], params.subpixel_refine);
      flows.push_back(FlowField::uniform(ref.height, ref.width, dx, dy));
    }
  }

  auto [fused, wmap] = shift_and_add(burst, flows, s);
  const Psf hr_psf = params.psf
                         ? *params.psf
                         : imaging::gaussian_psf(
                               0.5 * s, static_cast<int>(std::ceil(1.5 * s)));
  return deblur_wiener(fused, hr_psf, params.wiener_nsr);
}

}  // namespace burstsr::classic
