#pragma once

#include <cstddef>
#include <vector>

#include "burstsr/raster.hpp"

namespace burstsr::spmc {

// Dense feature plane, (y * width + x) * depth + c layout.
struct FeatureMap {
  int height = 0;
  int width = 0;
  int depth = 0;
  std::vector<double> data;

  FeatureMap() = default;
  FeatureMap(int h, int w, int d)
      : height(h),
        width(w),
        depth(d),
        data(static_cast<std::size_t>(h) * w * d, 0.0) {}

  double& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * depth + c];
  }
  double at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * depth + c];
  }
};

// Fused HR feature plane plus its accumulated splat-weight map. Values are
// defined (and nonzero-able) only where weight > eps; everything else is an
// uncovered cell, pinned to 0.
struct HrFeature {
  int height = 0;
  int width = 0;
  int depth = 0;
  std::vector<double> values;   // (y * width + x) * depth + c
  std::vector<double> weights;  // y * width + x
  double eps = 1e-8;
  double clipped_weight = 0.0;  // splat mass dropped at the grid border

  double value(int y, int x, int c) const {
    return values[(static_cast<std::size_t>(y) * width + x) * depth + c];
  }
  double weight(int y, int x) const {
    return weights[static_cast<std::size_t>(y) * width + x];
  }
  bool covered(int y, int x) const { return weight(y, x) > eps; }
};

// Inputs retained by spmc_forward for the gradient pass.
struct SpmcContext {
  std::vector<FeatureMap> features;
  std::vector<FlowField> flows;
  int s = 1;
  double eps = 1e-8;
  HrFeature fused;
  bool valid = false;
};

// Splats every feature vector f_k(p) at HR position s * (p + flow_k(p)) with
// bilinear weights and normalizes by the accumulated weight. Frame order
// cannot influence the result: accumulation runs in a content-determined
// order. Flow 0 is the reference (zero) by convention, not enforced.
HrFeature spmc_forward(const std::vector<FeatureMap>& features,
                       const std::vector<FlowField>& flows, int s,
                       double eps = 1e-8, SpmcContext* ctx = nullptr);

struct SpmcGrads {
  std::vector<FeatureMap> features;
  std::vector<FlowField> flows;  // d/du, d/dv packed like the input flows
};

// Exact gradients of the normalized weighted average, covering the flow
// dependence of both the splat weights and the normalization denominator.
// Cells at or below eps propagate nothing (subgradient 0).
SpmcGrads spmc_backward(const FeatureMap& grad_values, const SpmcContext& ctx);

// The feature shift-and-add block: spmc_forward with the standard eps.
HrFeature fuse(const std::vector<FeatureMap>& features,
               const std::vector<FlowField>& flows, int s);

}  // namespace burstsr::spmc
