#include "burstsr/splat.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "burstsr/common.hpp"

namespace burstsr::fuse {

Corners splat_corners(double y, double x, int height, int width) {
  Corners c;
  const double fy = std::floor(y);
  const double fx = std::floor(x);
  const int y0 = static_cast<int>(fy);
  const int x0 = static_cast<int>(fx);
  const double ay = y - fy;
  const double ax = x - fx;
  const double wy[2] = {1.0 - ay, ay};
  const double wx[2] = {1.0 - ax, ax};
  for (int dy = 0; dy < 2; ++dy) {
    for (int dx = 0; dx < 2; ++dx) {
      const double w = wy[dy] * wx[dx];
      if (w == 0.0) continue;
      const int yy = y0 + dy;
      const int xx = x0 + dx;
      if (yy < 0 || yy >= height || xx < 0 || xx >= width) {
        c.clipped += w;
        continue;
      }
      c.y[c.n] = yy;
      c.x[c.n] = xx;
      c.w[c.n] = w;
      ++c.n;
    }
  }
  return c;
}

std::vector<int> canonical_order(const std::vector<FrameKey>& keys) {
  const int n = static_cast<int>(keys.size());
  std::vector<std::uint64_t> hashes(n);
  for (int i = 0; i < n; ++i)
    hashes[i] = fnv1a64(keys[i].flow, keys[i].flow_bytes);

  auto lex = [](const void* a, std::size_t an, const void* b, std::size_t bn) {
    const int c = std::memcmp(a, b, std::min(an, bn));
    if (c != 0) return c;
    return an < bn ? -1 : (an > bn ? 1 : 0);
  };

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (hashes[a] != hashes[b]) return hashes[a] < hashes[b];
    const FrameKey& ka = keys[a];
    const FrameKey& kb = keys[b];
    int c = lex(ka.flow, ka.flow_bytes, kb.flow, kb.flow_bytes);
    if (c != 0) return c < 0;
    c = lex(ka.payload, ka.payload_bytes, kb.payload, kb.payload_bytes);
    return c < 0;
  });
  return order;
}

}  // namespace burstsr::fuse
