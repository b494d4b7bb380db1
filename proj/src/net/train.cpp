#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "burstsr/common.hpp"
#include "burstsr/imaging.hpp"
#include "burstsr/kernels.hpp"
#include "burstsr/misr_net.hpp"
#include "burstsr/scenes.hpp"
#include "net_ops.hpp"

namespace burstsr::net {

namespace {

void check_config(const TrainConfig& cfg) {
  require_arg(cfg.batch_size >= 1, "train: batch_size must be >= 1");
  require_arg(cfg.s >= 1, "train: s must be >= 1");
  require_arg(cfg.lr_encdec > 0.0 && cfg.lr_motion > 0.0,
              "train: learning rates must be positive");
  require_arg(cfg.max_epochs >= 1, "train: max_epochs must be >= 1");
  require_arg(cfg.early_stop_patience >= 1, "train: patience must be >= 1");
}

void accumulate(NetGrads& acc, const NetGrads& g) {
  auto a = param_spans(acc);
  auto b = param_spans(const_cast<NetGrads&>(g));
  for (std::size_t i = 0; i < a.size(); ++i)
    kernels::axpy(1.0, b[i].data, a[i].data, a[i].n);
}

void scale_grads(NetGrads& g, double alpha) {
  for (auto& s : param_spans(g)) kernels::scale(alpha, s.data, s.n);
}

std::vector<int> shuffled_indices(int n, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = n - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.uniform_int(i + 1)]);
  return idx;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt,
                          std::uint64_t i) {
  return fnv1a64(&i, sizeof(i), base ^ salt);
}

}  // namespace

TrainResult train(const std::vector<imaging::Burst>& train_set,
                  const std::vector<imaging::Burst>& val_set,
                  const TrainConfig& cfg) {
  require(!train_set.empty() && !val_set.empty(), ErrorCode::empty_input,
          "train: empty dataset");
  check_config(cfg);
  auto check_burst = [](const imaging::Burst& b) {
    require_arg(b.frame_count() > 0 && b.hr_truth.has_value(),
                "train: every burst needs frames and hr_truth");
  };
  for (const auto& b : train_set) check_burst(b);
  for (const auto& b : val_set) check_burst(b);

  const int c_in = train_set[0].frames[0].channels;
  NetParams params = init_params(c_in, cfg.seed);
  AdamState state;
  Rng shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);

  auto eval_val = [&](const NetParams& p) {
    double sum = 0.0;
    for (const auto& b : val_set)
      sum += l1_loss(forward(b, p, cfg.s), *b.hr_truth);
    return sum / static_cast<double>(val_set.size());
  };

  TrainResult result;
  TrainHistory& hist = result.history;
  hist.initial_val = eval_val(params);
  EarlyStopper stopper{cfg.early_stop_patience};
  NetParams best = params;

  const int n = static_cast<int>(train_set.size());
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const std::vector<int> order = shuffled_indices(n, shuffle_rng);
    double epoch_loss = 0.0;
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int stop = std::min(n, start + cfg.batch_size);
      NetGrads acc = zero_grads(params);
      for (int i = start; i < stop; ++i) {
        const imaging::Burst& b = train_set[order[i]];
        ForwardContext ctx;
        forward(b, params, cfg.s, &ctx);
        const double loss = l1_loss(ctx.pred, *b.hr_truth);
        require(std::isfinite(loss), ErrorCode::training_failure,
                "train: non-finite loss at epoch " + std::to_string(epoch));
        epoch_loss += loss;
        accumulate(acc, backward(*b.hr_truth, params, ctx));
      }
      scale_grads(acc, 1.0 / static_cast<double>(stop - start));
      adam_step(params, acc, state, cfg);
    }
    hist.train_loss.push_back(epoch_loss / static_cast<double>(n));

    const double val = eval_val(params);
    require(std::isfinite(val), ErrorCode::training_failure,
            "train: non-finite validation loss at epoch " +
                std::to_string(epoch));
    hist.val_loss.push_back(val);
    if (stopper.observe(epoch, val)) best = params;
    if (stopper.should_stop()) {
      hist.stopped_early = true;
      break;
    }
  }
  hist.best_epoch = stopper.best_epoch;
  hist.best_val = stopper.best;
  result.params = std::move(best);
  return result;
}

namespace {

// Mean endpoint error of a dense flow against the constant truth, and the
// matching gradient (subgradient 0 at an exactly-zero residual).
double epe_and_grad(const FlowField& flow, double tu, double tv,
                    spmc::FeatureMap* gflow) {
  const std::size_t npix =
      static_cast<std::size_t>(flow.height) * flow.width;
  double sum = 0.0;
  for (std::size_t i = 0; i < npix; ++i) {
    const double du = flow.data[2 * i] - tu;
    const double dv = flow.data[2 * i + 1] - tv;
    const double d = std::sqrt(du * du + dv * dv);
    sum += d;
    if (gflow) {
      const double inv = d > 0.0 ? 1.0 / (d * static_cast<double>(npix)) : 0.0;
      gflow->data[2 * i] = du * inv;
      gflow->data[2 * i + 1] = dv * inv;
    }
  }
  return sum / static_cast<double>(npix);
}

}  // namespace

PretrainResult pretrain_motion(const std::vector<FlowPair>& train_set,
                               const std::vector<FlowPair>& val_set,
                               NetParams params, const TrainConfig& cfg,
                               double lr) {
  require_arg(!train_set.empty() && !val_set.empty(),
              "pretrain_motion: empty dataset");
  check_config(cfg);
  require_arg(lr > 0.0, "pretrain_motion: lr must be positive");
  for (const auto& pr : train_set)
    require_arg(pr.frame.same_shape(pr.ref), "pretrain_motion: pair shape");
  for (const auto& pr : val_set)
    require_arg(pr.frame.same_shape(pr.ref), "pretrain_motion: pair shape");

  TrainConfig mcfg = cfg;
  mcfg.lr_motion = lr;  // encoder/decoder grads stay zero, so their lr is moot
  AdamState state;
  Rng shuffle_rng(cfg.seed ^ 0xc2b2ae3d27d4eb4full);

  auto eval_val = [&](const NetParams& p) {
    double sum = 0.0;
    for (const auto& pr : val_set)
      sum += epe_and_grad(estimate_flow(pr.frame, pr.ref, p), pr.u, pr.v,
                          nullptr);
    return sum / static_cast<double>(val_set.size());
  };

  PretrainResult result;
  EarlyStopper stopper{cfg.early_stop_patience};
  NetParams best = params;

  const int n = static_cast<int>(train_set.size());
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const std::vector<int> order = shuffled_indices(n, shuffle_rng);
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int stop = std::min(n, start + cfg.batch_size);
      NetGrads acc = zero_grads(params);
      for (int i = start; i < stop; ++i) {
        const FlowPair& pr = train_set[order[i]];
        MotionTrace tr;
        FlowField flow = estimate_flow(pr.frame, pr.ref, params, &tr);
        spmc::FeatureMap gflow(flow.height, flow.width, 2);
        const double loss = epe_and_grad(flow, pr.u, pr.v, &gflow);
        require(std::isfinite(loss), ErrorCode::training_failure,
                "pretrain_motion: non-finite loss at epoch " +
                    std::to_string(epoch));
        ops::motion_backward(gflow, params, tr, acc);
      }
      scale_grads(acc, 1.0 / static_cast<double>(stop - start));
      adam_step(params, acc, state, mcfg);
    }
    const double val = eval_val(params);
    require(std::isfinite(val), ErrorCode::training_failure,
            "pretrain_motion: non-finite validation EPE at epoch " +
                std::to_string(epoch));
    result.val_epe.push_back(val);
    if (stopper.observe(epoch, val)) best = params;
    result.best_so_far.push_back(stopper.best);
    if (stopper.should_stop()) break;
  }
  result.best_epoch = stopper.best_epoch;
  result.params = std::move(best);
  return result;
}

std::vector<imaging::Burst> make_patch_dataset(int count,
                                               const imaging::BurstConfig& cfg,
                                               int patch, std::uint64_t seed) {
  require_arg(count >= 1, "make_patch_dataset: count must be >= 1");
  require_arg(patch >= 4, "make_patch_dataset: patch must be >= 4");
  std::vector<imaging::Burst> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const std::uint64_t si = derive_seed(seed, 0x706174636865733aull, i);
    Raster hr = scenes::make_scene(patch * cfg.s, patch * cfg.s, 1, si);
    imaging::BurstConfig bc = cfg;
    bc.seed = derive_seed(seed, 0x6275727374733a00ull, i);
    out.push_back(imaging::synthesize_burst(hr, bc));
  }
  return out;
}

std::vector<FlowPair> make_flow_pairs(int count, int size, double max_shift,
                                      std::uint64_t seed) {
  require_arg(count >= 1, "make_flow_pairs: count must be >= 1");
  require_arg(size >= 4 && size % 4 == 0,
              "make_flow_pairs: size must be a positive multiple of 4");
  require_arg(max_shift >= 0.0, "make_flow_pairs: max_shift must be >= 0");
  std::vector<FlowPair> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, 0x70616972733a0000ull, i));
    FlowPair pr;
    // Blob fields, not make_scene: oriented gratings leave the along-stripe
    // motion component locally unobservable (the aperture problem), which
    // puts a floor under the endpoint error no optimizer can dig through.
    pr.ref = scenes::make_blob_scene(size, size, rng.next_u64());
    pr.u = rng.uniform(-max_shift, max_shift);
    pr.v = rng.uniform(-max_shift, max_shift);
    pr.frame = imaging::warp(
        pr.ref, FlowField::uniform(size, size, pr.u, pr.v),
        imaging::Boundary::replicate);
    out.push_back(std::move(pr));
  }
  return out;
}

}  // namespace burstsr::net
