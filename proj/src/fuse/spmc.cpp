#include "burstsr/spmc.hpp"

#include <cmath>

#include "burstsr/common.hpp"
#include "burstsr/splat.hpp"

namespace burstsr::spmc {

namespace {

void validate(const std::vector<FeatureMap>& features,
              const std::vector<FlowField>& flows, int s, double eps) {
  require(!features.empty(), ErrorCode::empty_input,
          "spmc: need at least one frame");
  require_arg(s >= 1, "spmc: s must be >= 1");
  require_arg(eps > 0.0, "spmc: eps must be positive");
  require_arg(features.size() == flows.size(), "spmc: one flow per frame");
  const FeatureMap& f0 = features[0];
  require_arg(f0.height > 0 && f0.width > 0 && f0.depth > 0,
              "spmc: empty feature map");
  for (std::size_t k = 0; k < features.size(); ++k) {
    require_arg(features[k].height == f0.height &&
                    features[k].width == f0.width &&
                    features[k].depth == f0.depth,
                "spmc: feature maps must share shape");
    require_arg(flows[k].height == f0.height && flows[k].width == f0.width,
                "spmc: flow shape must match its feature map");
  }
}

}  // namespace

HrFeature spmc_forward(const std::vector<FeatureMap>& features,
                       const std::vector<FlowField>& flows, int s, double eps,
                       SpmcContext* ctx) {
  validate(features, flows, s, eps);
  const int T = static_cast<int>(features.size());
  const FeatureMap& f0 = features[0];
  const int H = f0.height, W = f0.width, F = f0.depth;
  const int Hh = H * s, Wh = W * s;

  std::vector<fuse::FrameKey> keys(static_cast<std::size_t>(T));
  for (int k = 0; k < T; ++k)
    keys[k] = {flows[k].data.data(), flows[k].data.size() * sizeof(double),
               features[k].data.data(),
               features[k].data.size() * sizeof(double)};
  const std::vector<int> order = fuse::canonical_order(keys);

  HrFeature out;
  out.height = Hh;
  out.width = Wh;
  out.depth = F;
  out.eps = eps;
  out.values.assign(static_cast<std::size_t>(Hh) * Wh * F, 0.0);
  out.weights.assign(static_cast<std::size_t>(Hh) * Wh, 0.0);

  for (int k : order) {
    const FeatureMap& fm = features[k];
    const FlowField& fl = flows[k];
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        const double zy = s * (y + fl.v(y, x));
        const double zx = s * (x + fl.u(y, x));
        const fuse::Corners cs = fuse::splat_corners(zy, zx, Hh, Wh);
        out.clipped_weight += cs.clipped;
        const double* src =
            fm.data.data() + (static_cast<std::size_t>(y) * W + x) * F;
        for (int i = 0; i < cs.n; ++i) {
          const std::size_t q =
              static_cast<std::size_t>(cs.y[i]) * Wh + cs.x[i];
          const double w = cs.w[i];
          double* dst = out.values.data() + q * F;
          for (int c = 0; c < F; ++c) dst[c] += w * src[c];
          out.weights[q] += w;
        }
      }
  }

  for (std::size_t q = 0; q < out.weights.size(); ++q) {
    double* v = out.values.data() + q * F;
    if (out.weights[q] > eps) {
      const double inv = 1.0 / out.weights[q];
      for (int c = 0; c < F; ++c) v[c] *= inv;
    } else {
      for (int c = 0; c < F; ++c) v[c] = 0.0;
    }
  }

  if (ctx) {
    ctx->features = features;
    ctx->flows = flows;
    ctx->s = s;
    ctx->eps = eps;
    ctx->fused = out;
    ctx->valid = true;
  }
  return out;
}

SpmcGrads spmc_backward(const FeatureMap& grad_values,
                        const SpmcContext& ctx) {
  require(ctx.valid, ErrorCode::state,
          "spmc_backward: no saved forward context");
  const HrFeature& out = ctx.fused;
  require_arg(grad_values.height == out.height &&
                  grad_values.width == out.width &&
                  grad_values.depth == out.depth,
              "spmc_backward: upstream gradient shape mismatch");

  const int T = static_cast<int>(ctx.features.size());
  const int H = ctx.features[0].height, W = ctx.features[0].width;
  const int F = ctx.features[0].depth;
  const int Hh = out.height, Wh = out.width;
  const int s = ctx.s;

  // Per HR cell: b(q, c) = g / W on the value path, a(q) = -sum_c g * out / W
  // on the denominator path. Uncovered cells propagate nothing.
  const std::size_t cells = static_cast<std::size_t>(Hh) * Wh;
  std::vector<double> b(cells * F, 0.0), a(cells, 0.0);
  for (std::size_t q = 0; q < cells; ++q) {
    const double wq = out.weights[q];
    if (!(wq > ctx.eps)) continue;
    const double inv = 1.0 / wq;
    const double* g = grad_values.data.data() + q * F;
    const double* v = out.values.data() + q * F;
    double dot = 0.0;
    for (int c = 0; c < F; ++c) {
      b[q * F + c] = g[c] * inv;
      dot += g[c] * v[c];
    }
    a[q] = -dot * inv;
  }

  SpmcGrads grads;
  grads.features.assign(static_cast<std::size_t>(T), FeatureMap(H, W, F));
  grads.flows.assign(static_cast<std::size_t>(T), FlowField(H, W));

  for (int k = 0; k < T; ++k) {
    const FeatureMap& fm = ctx.features[k];
    const FlowField& fl = ctx.flows[k];
    FeatureMap& gf = grads.features[k];
    FlowField& gfl = grads.flows[k];
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        const double zy = s * (y + fl.v(y, x));
        const double zx = s * (x + fl.u(y, x));
        const double fy = std::floor(zy), fx = std::floor(zx);
        const int y0 = static_cast<int>(fy), x0 = static_cast<int>(fx);
        const double ay = zy - fy, ax = zx - fx;
        const double wy[2] = {1.0 - ay, ay}, dwy[2] = {-1.0, 1.0};
        const double wx[2] = {1.0 - ax, ax}, dwx[2] = {-1.0, 1.0};
        const double* src =
            fm.data.data() + (static_cast<std::size_t>(y) * W + x) * F;
        double* gsrc =
            gf.data.data() + (static_cast<std::size_t>(y) * W + x) * F;
        double gzy = 0.0, gzx = 0.0;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            const int qy = y0 + dy, qx = x0 + dx;
            if (qy < 0 || qy >= Hh || qx < 0 || qx >= Wh) continue;
            const std::size_t q = static_cast<std::size_t>(qy) * Wh + qx;
            if (!(out.weights[q] > ctx.eps)) continue;
            const double w = wy[dy] * wx[dx];
            const double* bq = b.data() + q * F;
            double s1 = 0.0;
            for (int c = 0; c < F; ++c) {
              gsrc[c] += w * bq[c];
              s1 += bq[c] * src[c];
            }
            const double contrib = s1 + a[q];
            gzy += contrib * dwy[dy] * wx[dx];
            gzx += contrib * wy[dy] * dwx[dx];
          }
        gfl.v(y, x) = gzy * s;
        gfl.u(y, x) = gzx * s;
      }
  }
  return grads;
}

HrFeature fuse(const std::vector<FeatureMap>& features,
               const std::vector<FlowField>& flows, int s) {
  return spmc_forward(features, flows, s, 1e-8, nullptr);
}

}  // namespace burstsr::spmc
