#include "burstsr/scenes.hpp"

#include <algorithm>
#include <cmath>

#include "burstsr/common.hpp"
#include "burstsr/imaging.hpp"

namespace burstsr::scenes {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

Raster make_scene(int height, int width, int channels, std::uint64_t seed) {
  require_arg(height > 0 && width > 0 && channels > 0,
              "make_scene: bad shape");
  Rng rng(seed);
  std::vector<double> s(static_cast<std::size_t>(height) * width, 0.0);
  auto sref = [&](int y, int x) -> double& {
    return s[static_cast<std::size_t>(y) * width + x];
  };

  // smooth background
  for (int i = 0; i < 3; ++i) {
    const double fy = rng.uniform(0.5, 2.5) / height;
    const double fx = rng.uniform(0.5, 2.5) / width;
    const double py = rng.uniform(0.0, kTwoPi);
    const double px = rng.uniform(0.0, kTwoPi);
    const double amp = rng.uniform(0.1, 0.3);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        sref(y, x) += amp * std::sin(kTwoPi * fy * y + py) *
                      std::sin(kTwoPi * fx * x + px);
  }

  // Gaussian blobs
  const int nblobs = std::max(6, height * width / 400);
  for (int i = 0; i < nblobs; ++i) {
    const double cy = rng.uniform(0.0, height);
    const double cx = rng.uniform(0.0, width);
    const double sig =
        rng.uniform(1.5, std::max(3.0, std::min(height, width) / 12.0));
    const double amp =
        (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.25, 1.0);
    const int r = static_cast<int>(std::ceil(3.0 * sig));
    const int y0 = std::max(0, static_cast<int>(cy) - r);
    const int y1 = std::min(height - 1, static_cast<int>(cy) + r);
    const int x0 = std::max(0, static_cast<int>(cx) - r);
    const int x1 = std::min(width - 1, static_cast<int>(cx) + r);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double d2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
        sref(y, x) += amp * std::exp(-d2 / (2.0 * sig * sig));
      }
  }

  // oriented gratings in random rectangles: high-frequency content
  for (int i = 0; i < 3; ++i) {
    const int ph = std::max(4, height / 4 + static_cast<int>(
                                                rng.uniform(0.0, height / 6.0)));
    const int pw = std::max(4, width / 4 + static_cast<int>(
                                               rng.uniform(0.0, width / 6.0)));
    const int oy = rng.uniform_int(std::max(1, height - ph));
    const int ox = rng.uniform_int(std::max(1, width - pw));
    const double th = rng.uniform(0.0, kTwoPi / 2.0);
    const double f = rng.uniform(0.08, 0.42);
    const double phase = rng.uniform(0.0, kTwoPi);
    const double amp = rng.uniform(0.2, 0.5);
    for (int y = oy; y < std::min(height, oy + ph); ++y)
      for (int x = ox; x < std::min(width, ox + pw); ++x)
        sref(y, x) += amp * std::sin(kTwoPi * f *
                                         (x * std::cos(th) + y * std::sin(th)) +
                                     phase);
  }

  // slanted step edges
  for (int i = 0; i < 2; ++i) {
    const double cy = rng.uniform(0.2 * height, 0.8 * height);
    const double cx = rng.uniform(0.2 * width, 0.8 * width);
    const double th = rng.uniform(0.0, kTwoPi / 2.0);
    const double amp =
        (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.3, 0.9);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const double d =
            (x - cx) * std::cos(th) - (y - cy) * std::sin(th);
        sref(y, x) += d > 0.0 ? 0.5 * amp : -0.5 * amp;
      }
  }

  // normalize structure to [0, 1]
  auto [mn, mx] = std::minmax_element(s.begin(), s.end());
  const double lo = *mn, span = *mx - *mn;
  for (double& v : s) v = span > 0.0 ? (v - lo) / span : 0.5;

  // per-band gains/offsets plus multiplicative elliptic patches so band
  // means carry distinct spectral signatures
  Raster out(height, width, channels);
  std::vector<double> gain(channels), offset(channels);
  for (int c = 0; c < channels; ++c) {
    gain[c] = rng.uniform(0.6, 1.4);
    offset[c] = rng.uniform(0.05, 0.15);
  }
  struct Patch {
    double cy, cx, ay, ax, th;
    std::vector<double> mult;
  };
  std::vector<Patch> patches;
  const int npatch = 2 + channels / 2;
  for (int i = 0; i < npatch; ++i) {
    Patch p;
    p.cy = rng.uniform(0.15 * height, 0.85 * height);
    p.cx = rng.uniform(0.15 * width, 0.85 * width);
    p.ay = rng.uniform(height / 12.0, height / 5.0);
    p.ax = rng.uniform(width / 12.0, width / 5.0);
    p.th = rng.uniform(0.0, kTwoPi / 2.0);
    p.mult.resize(channels);
    for (int c = 0; c < channels; ++c) p.mult[c] = rng.uniform(0.4, 1.6);
    patches.push_back(std::move(p));
  }
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double base = s[static_cast<std::size_t>(y) * width + x];
      for (int c = 0; c < channels; ++c) {
        double v = (offset[c] + 1.5 * base) * gain[c];
        for (const Patch& p : patches) {
          const double ry = (y - p.cy) * std::cos(p.th) -
                            (x - p.cx) * std::sin(p.th);
          const double rx = (y - p.cy) * std::sin(p.th) +
                            (x - p.cx) * std::cos(p.th);
          if ((ry * ry) / (p.ay * p.ay) + (rx * rx) / (p.ax * p.ax) <= 1.0)
            v *= p.mult[c];
        }
        out.at(y, x, c) = v;
      }
    }
  return out;
}

Raster make_edge_scene(int height, int width, double angle_deg,
                       double blur_sigma, double lo, double hi) {
  require_arg(height > 0 && width > 0, "make_edge_scene: bad shape");
  Raster out(height, width, 1);
  const double th = angle_deg * kTwoPi / 360.0;
  const double cy = 0.5 * (height - 1);
  const double cx = 0.5 * (width - 1) + 0.25;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double d = (x - cx) * std::cos(th) - (y - cy) * std::sin(th);
      out.at(y, x) = d > 0.0 ? hi : lo;
    }
  if (blur_sigma > 0.0) {
    const int r = std::max(1, static_cast<int>(std::ceil(3.0 * blur_sigma)));
    out = imaging::convolve(out, imaging::gaussian_psf(blur_sigma, r));
  }
  return out;
}

Raster make_blob_scene(int height, int width, std::uint64_t seed) {
  require_arg(height > 0 && width > 0, "make_blob_scene: bad shape");
  Rng rng(seed);
  Raster out(height, width, 1);
  const int nblobs = std::max(8, height * width / 24);
  for (int i = 0; i < nblobs; ++i) {
    const double cy = rng.uniform(0.0, height);
    const double cx = rng.uniform(0.0, width);
    const double sig = rng.uniform(1.2, 3.0);
    const double amp = rng.uniform(-1.0, 1.0);
    const double inv = 1.0 / (2.0 * sig * sig);
    const int r = static_cast<int>(std::ceil(3.0 * sig));
    const int y0 = std::max(0, static_cast<int>(cy) - r);
    const int y1 = std::min(height - 1, static_cast<int>(cy) + r);
    const int x0 = std::max(0, static_cast<int>(cx) - r);
    const int x1 = std::min(width - 1, static_cast<int>(cx) + r);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double d2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
        out.at(y, x) += amp * std::exp(-d2 * inv);
      }
  }
  return out;
}

}  // namespace burstsr::scenes
