#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "burstsr/imaging.hpp"
#include "burstsr/raster.hpp"

namespace burstsr::classic {

// (dx, dy) in LR pixels; frame(p) == ref(p + t).
using Translation = std::pair<double, double>;

struct ClassicParams {
  bool subpixel_refine = true;
  double wiener_nsr = 1e-3;  // >= 0
  int splat_radius = 1;      // bilinear accumulation footprint, HR pixels
  // Deblur kernel on the HR grid. Unset -> a half-LR-pixel Gaussian
  // (sigma = 0.5 * s), the assumed optical blur when the true one is unknown.
  std::optional<imaging::Psf> psf;
};

// Global translation by phase correlation (Hann-windowed, mean-removed,
// zero-padded), optional quadratic peak refinement.
Translation estimate_translation(const Raster& ref, const Raster& frame,
                                 bool subpixel_refine = true);

// Splats every LR pixel of frame k at HR position s * (p + flow_k(p)) with
// bilinear weights, then normalizes by accumulated weight. Returns the fused
// image and the weight map; HR pixels that received (near-)zero weight are
// infilled from covered neighbors and flagged by an exact 0 in the weight map.
std::pair<Raster, Raster> shift_and_add(const imaging::Burst& burst,
                                        const std::vector<FlowField>& flows,
                                        int s);
std::pair<Raster, Raster> shift_and_add(const imaging::Burst& burst,
                                        const std::vector<Translation>& shifts,
                                        int s);

// Frequency-domain Wiener deconvolution, conj(H) / (|H|^2 + nsr) per channel,
// computed on a mirror-padded tile to keep the boundary quiet.
Raster deblur_wiener(const Raster& image, const imaging::Psf& psf, double nsr);

// Catmull-Rom interpolation to (s*H, s*W); out(X) samples in(X / s).
Raster bicubic_upsample(const Raster& image, int s);

// Full pipeline: per-frame translation estimation (skipped when the burst
// carries true flows), shift-and-add fusion, Wiener deblur.
Raster classic_sr(const imaging::Burst& burst, int s,
                  const ClassicParams& params = {});

}  // namespace burstsr::classic
