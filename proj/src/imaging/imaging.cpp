#include "burstsr/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <numeric>

#include "burstsr/common.hpp"
#include "burstsr/kernels.hpp"

namespace burstsr::imaging {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

std::uint64_t frame_seed(std::uint64_t seed, int k) {
  unsigned char buf[12];
  std::memcpy(buf, &seed, 8);
  std::uint32_t ku = static_cast<std::uint32_t>(k);
  std::memcpy(buf + 8, &ku, 4);
  return fnv1a64(buf, sizeof buf);
}

// Half-sample symmetric index (…, a1, a0 | a0, a1, …), period 2n.
int mirror_index(int i, int n) {
  if (n == 1) return 0;
  const int p = 2 * n;
  int m = i % p;
  if (m < 0) m += p;
  return m < n ? m : p - 1 - m;
}

double sample_bilinear_mirror(const Raster& img, double y, double x, int c) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double a = x - x0;
  const double b = y - y0;
  double out = 0.0;
  for (int dy = 0; dy <= 1; ++dy)
    for (int dx = 0; dx <= 1; ++dx) {
      const double w = (dx ? a : 1.0 - a) * (dy ? b : 1.0 - b);
      out += w * img.at(mirror_index(y0 + dy, img.height),
                        mirror_index(x0 + dx, img.width), c);
    }
  return out;
}

double sample_bilinear_zero(const Raster& img, double y, double x, int c) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double a = x - x0;
  const double b = y - y0;
  double out = 0.0;
  for (int dy = 0; dy <= 1; ++dy)
    for (int dx = 0; dx <= 1; ++dx) {
      const int yy = y0 + dy;
      const int xx = x0 + dx;
      if (yy < 0 || yy >= img.height || xx < 0 || xx >= img.width) continue;
      const double w = (dx ? a : 1.0 - a) * (dy ? b : 1.0 - b);
      out += w * img.at(yy, xx, c);
    }
  return out;
}

// Frame-local flow on the HR grid: dense LR flow sampled at X/s, scaled by s.
FlowField upsample_flow(const FlowField& lr, int s) {
  FlowField hr;
  hr.height = lr.height * s;
  hr.width = lr.width * s;
  hr.data.assign(static_cast<std::size_t>(hr.height) * hr.width * 2, 0.0);
  Raster asraster;
  asraster.height = lr.height;
  asraster.width = lr.width;
  asraster.channels = 2;
  asraster.data = lr.data;
  for (int y = 0; y < hr.height; ++y)
    for (int x = 0; x < hr.width; ++x) {
      const double ly = static_cast<double>(y) / s;
      const double lx = static_cast<double>(x) / s;
      hr.u(y, x) = s * sample_bilinear(asraster, ly, lx, 0);
      hr.v(y, x) = s * sample_bilinear(asraster, ly, lx, 1);
    }
  return hr;
}

}  // namespace

Psf delta_psf() { return Psf{}; }

Psf gaussian_psf(double sigma, int radius) {
  require_arg(sigma > 0.0, "gaussian_psf: sigma must be positive");
  require_arg(radius >= static_cast<int>(std::ceil(3.0 * sigma)),
              "gaussian_psf: radius must be at least ceil(3*sigma)");
  Psf psf;
  psf.radius = radius;
  const int n = psf.size();
  psf.taps.assign(static_cast<std::size_t>(n) * n, 0.0);
  double sum = 0.0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      const double v =
          std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      psf.taps[static_cast<std::size_t>(dy + radius) * n + (dx + radius)] = v;
      sum += v;
    }
  for (double& t : psf.taps) t /= sum;
  return psf;
}

double mtf_of_psf(const Psf& psf, double freq, int oversample) {
  require_arg(freq >= 0.0, "mtf_of_psf: freq must be nonnegative");
  require_arg(oversample >= 1, "mtf_of_psf: oversample must be >= 1");
  const double ftap = freq / oversample;
  std::complex<double> h(0.0, 0.0);
  double dc = 0.0;
  for (int dx = -psf.radius; dx <= psf.radius; ++dx) {
    const double c = psf.tap(0, dx);
    h += c * std::polar(1.0, -2.0 * kPi * ftap * dx);
    dc += c;
  }
  return std::abs(h) / dc;
}

Raster warp(const Raster& image, const FlowField& flow, Boundary boundary) {
  require_arg(flow.height == image.height && flow.width == image.width,
              "warp: flow shape must match image");
  Raster out = image;
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      const double sy = y + flow.v(y, x);
      const double sx = x + flow.u(y, x);
      for (int c = 0; c < image.channels; ++c)
        out.at(y, x, c) = boundary == Boundary::replicate
                              ? sample_bilinear(image, sy, sx, c)
                          : boundary == Boundary::mirror
                              ? sample_bilinear_mirror(image, sy, sx, c)
                              : sample_bilinear_zero(image, sy, sx, c);
    }
  return out;
}

Raster convolve(const Raster& image, const Psf& psf, Boundary boundary) {
  const int r = psf.radius;
  const int n = psf.size();
  require_arg(n <= image.height && n <= image.width,
              "convolve: kernel larger than image");
  if (r == 0) {
    Raster out = image;
    for (double& v : out.data) v *= psf.taps[0];
    return out;
  }
  Raster out = image;
  const int ph = image.height + 2 * r;
  const int pw = image.width + 2 * r;
  std::vector<double> padded(static_cast<std::size_t>(ph) * pw);
  std::vector<double> plane(static_cast<std::size_t>(image.height) *
                            image.width);
  for (int c = 0; c < image.channels; ++c) {
    for (int y = 0; y < ph; ++y)
      for (int x = 0; x < pw; ++x) {
        const int sy = y - r;
        const int sx = x - r;
        double v = 0.0;
        if (boundary == Boundary::replicate) {
          v = image.at(std::clamp(sy, 0, image.height - 1),
                       std::clamp(sx, 0, image.width - 1), c);
        } else if (boundary == Boundary::mirror) {
          v = image.at(mirror_index(sy, image.height),
                       mirror_index(sx, image.width), c);
        } else if (sy >= 0 && sy < image.height && sx >= 0 &&
                   sx < image.width) {
          v = image.at(sy, sx, c);
        }
        padded[static_cast<std::size_t>(y) * pw + x] = v;
      }
    kernels::corr2d_valid(padded.data(), pw, psf.taps.data(), n, n,
                          plane.data(), image.height, image.width);
    for (int y = 0; y < image.height; ++y)
      for (int x = 0; x < image.width; ++x)
        out.at(y, x, c) = plane[static_cast<std::size_t>(y) * image.width + x];
  }
  return out;
}

Raster decimate(const Raster& image, int s, DecimateMode mode) {
  require_arg(s >= 1, "decimate: factor must be >= 1");
  require_arg(image.height % s == 0 && image.width % s == 0,
              "decimate: dims must be divisible by the factor");
  if (s == 1) return image;
  Raster out;
  out.height = image.height / s;
  out.width = image.width / s;
  out.channels = image.channels;
  out.data.assign(
      static_cast<std::size_t>(out.height) * out.width * out.channels, 0.0);
  if (image.pixel_size_m) out.pixel_size_m = *image.pixel_size_m * s;
  const double inv = 1.0 / (static_cast<double>(s) * s);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < out.channels; ++c) {
        if (mode == DecimateMode::point_sample) {
          out.at(y, x, c) = image.at(y * s, x * s, c);
        } else {
          double acc = 0.0;
          for (int dy = 0; dy < s; ++dy)
            for (int dx = 0; dx < s; ++dx)
              acc += image.at(y * s + dy, x * s + dx, c);
          out.at(y, x, c) = acc * inv;
        }
      }
  return out;
}

Raster add_noise(const Raster& image, double snr, std::uint64_t seed) {
  require_arg(snr > 0.0, "add_noise: snr must be positive");
  if (std::isinf(snr)) return image;
  const double mean =
      std::accumulate(image.data.begin(), image.data.end(), 0.0) /
      static_cast<double>(image.data.size());
  const double stddev = std::fabs(mean) / snr;
  Raster out = image;
  Rng rng(seed);
  for (double& v : out.data) v += rng.normal(0.0, stddev);
  return out;
}

Burst synthesize_burst(const Raster& hr, const BurstConfig& cfg) {
  require_arg(hr.height > 0 && hr.width > 0 && hr.channels > 0,
              "synthesize_burst: empty scene");
  require_arg(cfg.T >= 1, "synthesize_burst: T must be >= 1");
  require_arg(cfg.s >= 1, "synthesize_burst: s must be >= 1");
  require_arg(hr.height % cfg.s == 0 && hr.width % cfg.s == 0,
              "synthesize_burst: scene dims must be divisible by s");
  require_arg(cfg.snr > 0.0, "synthesize_burst: snr must be positive");
  const int lh = hr.height / cfg.s;
  const int lw = hr.width / cfg.s;

  const bool dense = cfg.motion.mode == MotionSpec::Mode::dense;
  std::vector<std::pair<double, double>> shifts;
  if (!dense) {
    shifts = cfg.motion.shifts;
    if (shifts.empty()) {
      Rng rng(cfg.seed);
      shifts.emplace_back(0.0, 0.0);
      for (int k = 1; k < cfg.T; ++k)
        shifts.emplace_back(rng.uniform(), rng.uniform());
    }
    require_arg(static_cast<int>(shifts.size()) == cfg.T,
                "synthesize_burst: one shift per frame required");
    require_arg(shifts[0].first == 0.0 && shifts[0].second == 0.0,
                "synthesize_burst: reference frame must have zero motion");
    for (auto [dx, dy] : shifts)
      require_arg(std::fabs(dx) < lw && std::fabs(dy) < lh,
                  "synthesize_burst: shift exceeds frame extent");
  } else {
    require_arg(static_cast<int>(cfg.motion.flows.size()) == cfg.T,
                "synthesize_burst: one flow per frame required");
    for (const FlowField& f : cfg.motion.flows)
      require_arg(f.height == lh && f.width == lw,
                  "synthesize_burst: dense flow must live on the LR grid");
    require_arg(cfg.motion.flows[0].is_zero(),
                "synthesize_burst: reference frame must have zero motion");
  }

  Burst burst;
  burst.reference_index = 0;
  std::vector<FlowField> true_flows;
  const bool is_delta = cfg.psf.radius == 0 && cfg.psf.taps.size() == 1 &&
                        cfg.psf.taps[0] == 1.0;
  for (int k = 0; k < cfg.T; ++k) {
    FlowField lr_flow = dense ? cfg.motion.flows[k]
                              : FlowField::uniform(lh, lw, shifts[k].first,
                                                   shifts[k].second);
    Raster stage;
    if (lr_flow.is_zero()) {
      stage = hr;
    } else if (dense) {
      stage = warp(hr, upsample_flow(lr_flow, cfg.s));
    } else {
      stage = warp(hr, FlowField::uniform(hr.height, hr.width,
                                          cfg.s * shifts[k].first,
                                          cfg.s * shifts[k].second));
    }
    if (!is_delta) stage = convolve(stage, cfg.psf);
    stage = decimate(stage, cfg.s, cfg.decimate_mode);
    if (!std::isinf(cfg.snr))
      stage = add_noise(stage, cfg.snr, frame_seed(cfg.seed, k));
    burst.frames.push_back(std::move(stage));
    true_flows.push_back(std::move(lr_flow));
  }
  burst.true_flows = std::move(true_flows);
  burst.hr_truth = hr;
  return burst;
}

int required_samples(int s) {
  require_arg(s >= 1, "required_samples: s must be >= 1");
  return s * s;
}

double required_shift(int s) {
  require_arg(s >= 1, "required_shift: s must be >= 1");
  return 1.0 / s;
}

PhaseCoverage phase_coverage(
    const std::vector<std::pair<double, double>>& shifts, int s) {
  require_arg(!shifts.empty(), "phase_coverage: shifts must be nonempty");
  require_arg(s >= 1, "phase_coverage: s must be >= 1");
  PhaseCoverage cov;
  cov.s = s;
  cov.counts.assign(static_cast<std::size_t>(s) * s, 0);
  for (auto [dx, dy] : shifts) {
    const double fx = dx - std::floor(dx);
    const double fy = dy - std::floor(dy);
    const int cx = std::min(static_cast<int>(fx * s), s - 1);
    const int cy = std::min(static_cast<int>(fy * s), s - 1);
    ++cov.counts[static_cast<std::size_t>(cy) * s + cx];
  }
  cov.all_occupied = true;
  for (int c : cov.counts)
    if (c == 0) cov.all_occupied = false;
  return cov;
}

Raster bin_gac(const Raster& image, int factor) {
  return decimate(image, factor, DecimateMode::block_average);
}

}  // namespace burstsr::imaging
