#pragma once

#include <cstddef>
#include <vector>

namespace burstsr::fuse {

// Bilinear splat footprint of a continuous grid position. Zero-weight corners
// are dropped; corners falling off the grid are dropped too and their weight
// mass reported, so callers can account for every unit of splatted mass.
struct Corners {
  int y[4];
  int x[4];
  double w[4];
  int n = 0;
  double clipped = 0.0;
};

Corners splat_corners(double y, double x, int height, int width);

// Content-determined accumulation order: frames sorted by flow bytes (hashed
// first, then lexicographically), ties broken by payload bytes. Any fused
// result accumulated in this order is independent of caller-side frame
// ordering, bit for bit.
struct FrameKey {
  const void* flow = nullptr;
  std::size_t flow_bytes = 0;
  const void* payload = nullptr;
  std::size_t payload_bytes = 0;
};

std::vector<int> canonical_order(const std::vector<FrameKey>& keys);

}  // namespace burstsr::fuse
