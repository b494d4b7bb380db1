#include "burstsr/misr_net.hpp"

#include <cmath>
#include <cstring>

#include "burstsr/common.hpp"
#include "burstsr/kernels.hpp"
#include "net_ops.hpp"

namespace burstsr::net {

using ops::conv_backward;
using ops::conv_forward;
using spmc::FeatureMap;

ConvLayer::ConvLayer(int in, int out, int k, int stride_)
    : in_ch(in),
      out_ch(out),
      ksize(k),
      stride(stride_),
      pad(k / 2),
      w(static_cast<std::size_t>(k) * k * in * out, 0.0),
      b(static_cast<std::size_t>(out), 0.0) {}

namespace {

constexpr int kFeatureDepth = 32;

void fill_uniform(ConvLayer& layer, Rng& rng) {
  const double bound =
      1.0 / std::sqrt(static_cast<double>(layer.ksize) * layer.ksize *
                      layer.in_ch);
  for (double& v : layer.w) v = rng.uniform(-bound, bound);
}

}  // namespace

NetParams init_params(int c_in, std::uint64_t seed) {
  require_arg(c_in >= 1, "init_params: c_in must be positive");
  NetParams p;
  p.c_in = c_in;
  p.encoder = {ConvLayer(c_in, kFeatureDepth), ConvLayer(kFeatureDepth, kFeatureDepth),
               ConvLayer(kFeatureDepth, kFeatureDepth)};
  p.decoder = {ConvLayer(kFeatureDepth, kFeatureDepth),
               ConvLayer(kFeatureDepth, kFeatureDepth), ConvLayer(kFeatureDepth, c_in)};
  p.m_down1 = ConvLayer(2 * c_in, 16, 3, 2);
  p.m_down2 = ConvLayer(16, 32, 3, 2);
  p.m_up1 = ConvLayer(32, 16);
  p.m_up2 = ConvLayer(16, 16);
  p.m_head = ConvLayer(16, 2);  // stays zero: initial flow is exactly zero

  Rng rng(seed);
  for (auto& l : p.encoder) fill_uniform(l, rng);
  for (auto& l : p.decoder) fill_uniform(l, rng);
  fill_uniform(p.m_down1, rng);
  fill_uniform(p.m_down2, rng);
  fill_uniform(p.m_up1, rng);
  fill_uniform(p.m_up2, rng);
  return p;
}

std::vector<ParamSpan> param_spans(NetParams& p) {
  std::vector<ParamSpan> spans;
  auto add = [&spans](ConvLayer& l, bool motion) {
    spans.push_back({l.w.data(), l.w.size(), motion});
    spans.push_back({l.b.data(), l.b.size(), motion});
  };
  for (auto& l : p.encoder) add(l, false);
  for (auto& l : p.decoder) add(l, false);
  add(p.m_down1, true);
  add(p.m_down2, true);
  add(p.m_up1, true);
  add(p.m_up2, true);
  add(p.m_head, true);
  return spans;
}

std::size_t param_count(const NetParams& p) {
  std::size_t n = 0;
  for (const auto& s : param_spans(const_cast<NetParams&>(p))) n += s.n;
  return n;
}

NetGrads zero_grads(const NetParams& like) {
  NetGrads g = like;
  for (auto& s : param_spans(g)) std::memset(s.data, 0, s.n * sizeof(double));
  return g;
}

spmc::FeatureMap encode(const Raster& frame, const NetParams& p,
                        StackTrace* tr) {
  require_arg(frame.channels == p.c_in, "encode: channel mismatch");
  require_arg(frame.height >= 1 && frame.width >= 1, "encode: empty frame");
  return ops::run_stack(p.encoder, ops::raster_to_fmap(frame), 2, tr);
}

FlowField estimate_flow(const Raster& frame, const Raster& ref,
                        const NetParams& p, MotionTrace* tr) {
  require_arg(frame.same_shape(ref), "estimate_flow: shape mismatch");
  require_arg(frame.channels == p.c_in, "estimate_flow: channel mismatch");
  require_arg(frame.height % 4 == 0 && frame.width % 4 == 0 &&
                  frame.height >= 4 && frame.width >= 4,
              "estimate_flow: H and W must be divisible by 4");

  // Motion depends on contrast, not on absolute radiance: each input enters
  // zero-mean, so a pretrained estimator transfers across brightness levels.
  auto centered = [](const Raster& r) {
    FeatureMap f(r.height, r.width, r.channels);
    double mean = 0.0;
    for (double v : r.data) mean += v;
    mean /= static_cast<double>(r.data.size());
    for (std::size_t i = 0; i < r.data.size(); ++i)
      f.data[i] = r.data[i] - mean;
    return f;
  };
  FeatureMap cat = ops::concat_channels(centered(frame), centered(ref));
  FeatureMap d1_pre = conv_forward(cat, p.m_down1);
  FeatureMap d1 = d1_pre;
  ops::relu_inplace(d1);
  FeatureMap d2_pre = conv_forward(d1, p.m_down2);
  FeatureMap d2 = d2_pre;
  ops::relu_inplace(d2);
  FeatureMap u1_in = ops::upsample2x(d2);
  FeatureMap u1_pre = conv_forward(u1_in, p.m_up1);
  FeatureMap u1 = u1_pre;
  ops::relu_inplace(u1);
  FeatureMap u2_in = ops::upsample2x(u1);
  FeatureMap u2_pre = conv_forward(u2_in, p.m_up2);
  FeatureMap u2 = u2_pre;
  ops::relu_inplace(u2);
  FeatureMap head = conv_forward(u2, p.m_head);

  FlowField flow(frame.height, frame.width);
  std::memcpy(flow.data.data(), head.data.data(),
              head.data.size() * sizeof(double));
  if (tr) {
    tr->cat = std::move(cat);
    tr->d1_pre = std::move(d1_pre);
    tr->d1 = std::move(d1);
    tr->d2_pre = std::move(d2_pre);
    tr->d2 = std::move(d2);
    tr->u1_in = std::move(u1_in);
    tr->u1_pre = std::move(u1_pre);
    tr->u1 = std::move(u1);
    tr->u2_in = std::move(u2_in);
    tr->u2_pre = std::move(u2_pre);
    tr->u2 = std::move(u2);
  }
  return flow;
}

Raster decode(const spmc::HrFeature& hr, const NetParams& p, StackTrace* tr) {
  require_arg(hr.depth == kFeatureDepth, "decode: feature depth mismatch");
  FeatureMap in(hr.height, hr.width, hr.depth);
  in.data = hr.values;
  return ops::fmap_to_raster(ops::run_stack(p.decoder, in, 2, tr));
}

Raster forward(const imaging::Burst& burst, const NetParams& p, int s,
               ForwardContext* ctx) {
  require(burst.frame_count() > 0, ErrorCode::empty_input,
          "forward: empty burst");
  require_arg(s >= 1, "forward: s must be >= 1");
  require_arg(burst.reference_index >= 0 &&
                  burst.reference_index < burst.frame_count(),
              "forward: reference index out of range");
  const Raster& ref = burst.frames[burst.reference_index];
  for (const auto& f : burst.frames)
    require_arg(f.same_shape(ref), "forward: frames must share one shape");

  const int T = burst.frame_count();
  std::vector<FeatureMap> features;
  std::vector<FlowField> flows;
  features.reserve(T);
  flows.reserve(T);
  if (ctx) {
    *ctx = ForwardContext();
    ctx->enc.resize(T);
    ctx->motion_slot.assign(T, -1);
  }
  for (int k = 0; k < T; ++k) {
    features.push_back(encode(burst.frames[k], p, ctx ? &ctx->enc[k] : nullptr));
    if (k == burst.reference_index) {
      flows.emplace_back(ref.height, ref.width);
    } else {
      MotionTrace* mt = nullptr;
      if (ctx) {
        ctx->motion_slot[k] = static_cast<int>(ctx->motion.size());
        ctx->motion.emplace_back();
        mt = &ctx->motion.back();
      }
      flows.push_back(estimate_flow(burst.frames[k], ref, p, mt));
    }
  }

  spmc::HrFeature fused =
      spmc::spmc_forward(features, flows, s, 1e-8, ctx ? &ctx->fuse : nullptr);
  Raster pred = decode(fused, p, ctx ? &ctx->dec : nullptr);
  if (ref.pixel_size_m) pred.pixel_size_m = *ref.pixel_size_m / s;
  if (ctx) {
    ctx->valid = true;
    ctx->s = s;
    ctx->reference = burst.reference_index;
    ctx->pred = pred;
  }
  return pred;
}

double l1_loss(const Raster& pred, const Raster& truth) {
  require_arg(pred.same_shape(truth), "l1_loss: shape mismatch");
  require_arg(pred.size() > 0, "l1_loss: empty input");
  return kernels::sum_abs_diff(pred.data.data(), truth.data.data(),
                               pred.size()) /
         static_cast<double>(pred.size());
}

namespace ops {

void motion_backward(const FeatureMap& gflow, const NetParams& p,
                     const MotionTrace& tr, NetGrads& g) {
  FeatureMap gx = conv_backward(gflow, tr.u2, p.m_head, g.m_head, true);
  gx = relu_backward(tr.u2_pre, gx);
  gx = conv_backward(gx, tr.u2_in, p.m_up2, g.m_up2, true);
  gx = upsample2x_backward(gx, tr.u1.height, tr.u1.width);
  gx = relu_backward(tr.u1_pre, gx);
  gx = conv_backward(gx, tr.u1_in, p.m_up1, g.m_up1, true);
  gx = upsample2x_backward(gx, tr.d2.height, tr.d2.width);
  gx = relu_backward(tr.d2_pre, gx);
  gx = conv_backward(gx, tr.d1, p.m_down2, g.m_down2, true);
  gx = relu_backward(tr.d1_pre, gx);
  conv_backward(gx, tr.cat, p.m_down1, g.m_down1, false);
}

}  // namespace ops

NetGrads backward(const Raster& truth, const NetParams& p,
                  const ForwardContext& ctx, bool motion_frozen) {
  require(ctx.valid, ErrorCode::state, "backward: forward activations missing");
  require_arg(truth.same_shape(ctx.pred), "backward: truth shape mismatch");

  NetGrads grads = zero_grads(p);
  const std::size_t n = ctx.pred.size();
  FeatureMap gpred(ctx.pred.height, ctx.pred.width, ctx.pred.channels);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ctx.pred.data[i] - truth.data[i];
    gpred.data[i] = r > 0.0 ? inv_n : (r < 0.0 ? -inv_n : 0.0);
  }

  FeatureMap gvalues =
      ops::backward_stack(p.decoder, ctx.dec, gpred, grads.decoder, 2, true);
  spmc::SpmcGrads sg = spmc::spmc_backward(gvalues, ctx.fuse);

  const int T = static_cast<int>(ctx.enc.size());
  for (int k = 0; k < T; ++k)
    ops::backward_stack(p.encoder, ctx.enc[k], sg.features[k], grads.encoder,
                        2, false);

  if (!motion_frozen) {
    for (int k = 0; k < T; ++k) {
      const int slot = ctx.motion_slot[k];
      if (slot < 0) continue;  // reference frame: flow is a constant zero
      FeatureMap gflow(sg.flows[k].height, sg.flows[k].width, 2);
      std::memcpy(gflow.data.data(), sg.flows[k].data.data(),
                  gflow.data.size() * sizeof(double));
      ops::motion_backward(gflow, p, ctx.motion[slot], grads);
    }
  }
  return grads;
}

void adam_step(NetParams& p, const NetGrads& g, AdamState& st,
               const TrainConfig& cfg) {
  require_arg(cfg.lr_encdec > 0.0 && cfg.lr_motion > 0.0,
              "adam: learning rates must be positive");
  auto spans = param_spans(p);
  auto gspans = param_spans(const_cast<NetGrads&>(g));
  require_arg(spans.size() == gspans.size(), "adam: parameter shape mismatch");
  std::size_t total = 0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    require_arg(spans[i].n == gspans[i].n, "adam: parameter shape mismatch");
    total += spans[i].n;
  }
  if (st.m.empty()) {
    st.m.assign(total, 0.0);
    st.v.assign(total, 0.0);
  }
  require(st.m.size() == total && st.v.size() == total, ErrorCode::state,
          "adam: moment buffers sized for a different net");

  ++st.step;
  const double bc1 = 1.0 / (1.0 - std::pow(cfg.beta1, st.step));
  const double bc2 = 1.0 / (1.0 - std::pow(cfg.beta2, st.step));
  std::size_t off = 0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const double lr = spans[i].motion ? cfg.lr_motion : cfg.lr_encdec;
    kernels::adam_update(spans[i].data, st.m.data() + off, st.v.data() + off,
                         gspans[i].data, spans[i].n, lr, cfg.beta1, cfg.beta2,
                         cfg.adam_eps, bc1, bc2);
    off += spans[i].n;
  }
}

}  // namespace burstsr::net
