#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "burstsr/common.hpp"

namespace burstsr {

// H x W x C image grid, row-major with interleaved channels. The universal
// carrier for HR scenes, LR frames and metric inputs. Values are
// radiance-like and dimensionless.
struct Raster {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<double> data;
  std::optional<double> pixel_size_m;

  Raster() = default;
  Raster(int h, int w, int c)
      : height(h), width(w), channels(c),
        data(static_cast<std::size_t>(h) * w * c, 0.0) {}

  static Raster constant(int h, int w, int c, double v) {
    Raster r(h, w, c);
    std::fill(r.data.begin(), r.data.end(), v);
    return r;
  }

  double& at(int y, int x, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  std::size_t size() const { return data.size(); }

  bool same_shape(const Raster& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

// Per-pixel 2-vector displacement in LR pixel units. Pixel p of a frame
// corresponds to reference-frame position p + (u, v), with u along x and
// v along y.
struct FlowField {
  int height = 0;
  int width = 0;
  std::vector<double> data;  // interleaved (u, v)

  FlowField() = default;
  FlowField(int h, int w)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w * 2, 0.0) {}

  static FlowField uniform(int h, int w, double u, double v) {
    FlowField f(h, w);
    for (std::size_t i = 0; i < f.data.size(); i += 2) {
      f.data[i] = u;
      f.data[i + 1] = v;
    }
    return f;
  }

  double& u(int y, int x) {
    return data[(static_cast<std::size_t>(y) * width + x) * 2];
  }
  double u(int y, int x) const {
    return data[(static_cast<std::size_t>(y) * width + x) * 2];
  }
  double& v(int y, int x) {
    return data[(static_cast<std::size_t>(y) * width + x) * 2 + 1];
  }
  double v(int y, int x) const {
    return data[(static_cast<std::size_t>(y) * width + x) * 2 + 1];
  }

  bool is_zero() const {
    for (double d : data)
      if (d != 0.0) return false;
    return true;
  }
};

// Bilinear sample of one channel with replicate (clamp) boundary.
inline double sample_bilinear(const Raster& img, double y, double x, int c) {
  const int h = img.height, w = img.width;
  double xc = std::min(std::max(x, 0.0), static_cast<double>(w - 1));
  double yc = std::min(std::max(y, 0.0), static_cast<double>(h - 1));
  int x0 = static_cast<int>(std::floor(xc));
  int y0 = static_cast<int>(std::floor(yc));
  if (x0 >= w - 1) x0 = w - 2 < 0 ? 0 : w - 2;
  if (y0 >= h - 1) y0 = h - 2 < 0 ? 0 : h - 2;
  int x1 = std::min(x0 + 1, w - 1);
  int y1 = std::min(y0 + 1, h - 1);
  double a = xc - x0;
  double b = yc - y0;
  if (w == 1) { x1 = x0; a = 0.0; }
  if (h == 1) { y1 = y0; b = 0.0; }
  double p00 = img.at(y0, x0, c), p10 = img.at(y0, x1, c);
  double p01 = img.at(y1, x0, c), p11 = img.at(y1, x1, c);
  return p00 * (1 - a) * (1 - b) + p10 * a * (1 - b) + p01 * (1 - a) * b +
         p11 * a * b;
}

}  // namespace burstsr
