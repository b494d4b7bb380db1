#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "burstsr/raster.hpp"

namespace burstsr::imaging {

// Square blur kernel, (2*radius+1)^2 taps, row-major, normalized to sum 1.
struct Psf {
  int radius = 0;
  std::vector<double> taps{1.0};

  int size() const { return 2 * radius + 1; }
  double tap(int dy, int dx) const {
    return taps[static_cast<std::size_t>(dy + radius) * size() + (dx + radius)];
  }
};

Psf delta_psf();
Psf gaussian_psf(double sigma, int radius);

// |DTFT| of the kernel's central row, MTF(0) == 1. freq is in cycles per
// `oversample` tap spacings: a PSF sampled on the s-times-finer HR grid is
// evaluated at LR-pixel frequencies with oversample = s, which is what lets
// the response stay meaningful past the LR Nyquist (an oversampled system's
// MTF has support up to oversample * 0.5 cycles/LR-pixel).
double mtf_of_psf(const Psf& psf, double freq, int oversample = 1);

enum class Boundary { replicate, zero, mirror };

// Samples image at p + flow(p), bilinear.
Raster warp(const Raster& image, const FlowField& flow,
            Boundary boundary = Boundary::replicate);

// Per-channel 2-D correlation (the default PSFs are symmetric).
Raster convolve(const Raster& image, const Psf& psf,
                Boundary boundary = Boundary::replicate);

// block_average models detector area integration; point_sample exists for
// exactness oracles (out(x) = in(s*x)).
enum class DecimateMode { block_average, point_sample };

Raster decimate(const Raster& image, int s,
                DecimateMode mode = DecimateMode::block_average);

// Additive Gaussian noise, std = global mean / snr. snr = inf is a no-op.
Raster add_noise(const Raster& image, double snr, std::uint64_t seed);

struct MotionSpec {
  enum class Mode { translational, dense };
  Mode mode = Mode::translational;
  // Per-frame (dx, dy) in LR pixel units; empty -> drawn uniformly from
  // [0,1)^2 with frame 0 pinned at zero.
  std::vector<std::pair<double, double>> shifts;
  // Dense per-frame flow on the LR grid, LR pixel units (dense mode).
  std::vector<FlowField> flows;
};

struct BurstConfig {
  int T = 24;
  int s = 2;
  Psf psf;  // applied on the HR grid before decimation
  MotionSpec motion;
  double snr = 800.0;  // > 0; infinity disables noise
  std::uint64_t seed = 0;
  DecimateMode decimate_mode = DecimateMode::block_average;
};

struct Burst {
  std::vector<Raster> frames;
  int reference_index = 0;
  std::optional<std::vector<FlowField>> true_flows;  // LR px, frame -> ref
  std::optional<Raster> hr_truth;

  int frame_count() const { return static_cast<int>(frames.size()); }
};

// Degradation chain per frame: motion -> blur -> decimate -> noise.
Burst synthesize_burst(const Raster& hr, const BurstConfig& cfg);

// Feasibility math: s^2 samples needed, 1/s px shift granularity.
int required_samples(int s);
double required_shift(int s);

struct PhaseCoverage {
  int s = 1;
  std::vector<int> counts;  // s*s cells, row-major (cy*s + cx)
  bool all_occupied = false;
};

PhaseCoverage phase_coverage(const std::vector<std::pair<double, double>>& shifts,
                             int s);

// Block average for the fine->coarse product workflow; scales pixel_size_m.
Raster bin_gac(const Raster& image, int factor = 3);

}  // namespace burstsr::imaging
