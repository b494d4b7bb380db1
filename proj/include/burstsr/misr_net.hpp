#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "burstsr/imaging.hpp"
#include "burstsr/raster.hpp"
#include "burstsr/spmc.hpp"

namespace burstsr::net {

// One zero-padded convolution. Weights are stored as a
// [ksize*ksize*in_ch x out_ch] matrix whose row index runs (ky, kx, ci), so
// an im2col patch matrix multiplies straight into the interleaved-channel
// output layout with a single GEMM.
struct ConvLayer {
  int in_ch = 0;
  int out_ch = 0;
  int ksize = 3;
  int stride = 1;
  int pad = 1;
  std::vector<double> w;  // ((ky*ksize + kx)*in_ch + ci) * out_ch + co
  std::vector<double> b;  // out_ch

  ConvLayer() = default;
  ConvLayer(int in, int out, int k = 3, int stride_ = 1);
};

// Encoder: C_in->32->32->32, 3x3, ReLU after the first two layers.
// Decoder: 32->32->32->C_in, same shape rules, linear output.
// Motion: two stride-2 downsampling convs (2*C_in->16->32), two
// bilinear-x2-then-conv upsampling levels (32->16->16), and a 3x3 flow head
// (16->2) whose weights and bias start at zero so the initial flow is
// exactly zero everywhere.
struct NetParams {
  int c_in = 1;
  std::vector<ConvLayer> encoder;
  std::vector<ConvLayer> decoder;
  ConvLayer m_down1, m_down2, m_up1, m_up2, m_head;
};

// Gradients share the parameter container shape.
using NetGrads = NetParams;

// Uniform +-1/sqrt(fan_in) weights, zero biases, zero flow head; every draw
// comes from the seeded deterministic stream in layer order.
NetParams init_params(int c_in, std::uint64_t seed);
NetGrads zero_grads(const NetParams& like);
std::size_t param_count(const NetParams& p);

// Flat view over every trainable scalar: encoder, decoder, then motion
// layers, weights before bias within a layer. Used by the optimizer, the
// checkpoint format, and finite-difference probes.
struct ParamSpan {
  double* data = nullptr;
  std::size_t n = 0;
  bool motion = false;
};
std::vector<ParamSpan> param_spans(NetParams& p);

struct TrainConfig {
  int batch_size = 16;
  int patch = 64;  // LR patch side used by the dataset builders
  int s = 2;
  double lr_encdec = 1e-4;
  double lr_motion = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int max_epochs = 30;
  int early_stop_patience = 5;
  std::uint64_t seed = 0;
};

// Moment accumulators concatenated in param_spans order; sized lazily on the
// first step.
struct AdamState {
  std::vector<double> m, v;
  long step = 0;
};

// Saved activations from one forward pass; backward consumes them. A stack
// trace keeps each layer's input and, for ReLU layers, the pre-activation.
struct StackTrace {
  std::vector<spmc::FeatureMap> inputs;
  std::vector<spmc::FeatureMap> pre;
};

struct MotionTrace {
  spmc::FeatureMap cat;                  // frame || ref channels
  spmc::FeatureMap d1_pre, d1;           // H/2, 16 ch
  spmc::FeatureMap d2_pre, d2;           // H/4, 32 ch
  spmc::FeatureMap u1_in, u1_pre, u1;    // H/2, 16 ch after conv
  spmc::FeatureMap u2_in, u2_pre, u2;    // H, 16 ch
};

struct ForwardContext {
  bool valid = false;
  int s = 1;
  int reference = 0;
  std::vector<StackTrace> enc;        // one per frame
  std::vector<MotionTrace> motion;    // one per non-reference frame
  std::vector<int> motion_slot;       // frame index -> motion index, -1 = ref
  spmc::SpmcContext fuse;
  StackTrace dec;
  Raster pred;
};

// H x W x 32 features, spatial size preserved. Channel-count mismatch with
// params.c_in -> invalid_argument.
spmc::FeatureMap encode(const Raster& frame, const NetParams& p,
                        StackTrace* tr = nullptr);

// Dense flow from the hourglass on concat(frame, ref), LR pixel units, same
// p + (u, v) convention as FlowField. Requires equal shapes and H, W
// divisible by 4 (two stride-2 levels must invert exactly).
FlowField estimate_flow(const Raster& frame, const Raster& ref,
                        const NetParams& p, MotionTrace* tr = nullptr);

// sH x sW x C_in image from fused features (uncovered cells enter as zero).
// Depth != 32 -> invalid_argument.
Raster decode(const spmc::HrFeature& hr, const NetParams& p,
              StackTrace* tr = nullptr);

// encode every frame -> flow per non-reference frame (reference flow is the
// zero field) -> spmc fuse at factor s -> decode. Pass ctx to retain
// activations for backward.
Raster forward(const imaging::Burst& burst, const NetParams& p, int s,
               ForwardContext* ctx = nullptr);

// Mean absolute difference; shape mismatch -> invalid_argument.
double l1_loss(const Raster& pred, const Raster& truth);

// Gradients of l1_loss(ctx.pred, truth) for every parameter. Needs a context
// filled by forward (state error otherwise). The L1 subgradient at zero
// residual is zero. motion_frozen skips the motion group entirely, leaving
// those gradients at exactly zero.
NetGrads backward(const Raster& truth, const NetParams& p,
                  const ForwardContext& ctx, bool motion_frozen = false);

// Adam with bias correction; encoder/decoder spans use cfg.lr_encdec, motion
// spans cfg.lr_motion. Zero gradients with fresh state leave params bitwise
// unchanged.
void adam_step(NetParams& p, const NetGrads& g, AdamState& st,
               const TrainConfig& cfg);

// Strict-improvement early stopping: observe() returns true on a new best;
// should_stop() fires after `patience` consecutive non-improving epochs.
struct EarlyStopper {
  int patience = 5;
  double best = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  int stale = 0;

  bool observe(int epoch, double val) {
    if (val < best) {
      best = val;
      best_epoch = epoch;
      stale = 0;
      return true;
    }
    ++stale;
    return false;
  }
  bool should_stop() const { return stale >= patience; }
};

struct TrainHistory {
  double initial_val = std::numeric_limits<double>::infinity();  // untrained
  std::vector<double> train_loss;  // per epoch, mean over batches
  std::vector<double> val_loss;    // per epoch
  int best_epoch = -1;
  double best_val = std::numeric_limits<double>::infinity();
  bool stopped_early = false;
};

struct TrainResult {
  NetParams params;  // best-validation checkpoint
  TrainHistory history;
};

// Mini-batch Adam on L1 against each burst's hr_truth; shuffling, init and
// updates are all seeded, so a fixed config gives a bit-identical history.
// Empty train/val set -> empty_input; missing hr_truth -> invalid_argument;
// non-finite loss -> training_failure naming the epoch.
TrainResult train(const std::vector<imaging::Burst>& train_set,
                  const std::vector<imaging::Burst>& val_set,
                  const TrainConfig& cfg);

// One (frame, ref) pair related by a constant translation, frame(p) =
// ref(p + t), t = (u, v) in LR pixels.
struct FlowPair {
  Raster frame, ref;
  double u = 0.0;
  double v = 0.0;
};

struct PretrainResult {
  NetParams params;  // best-validation checkpoint
  std::vector<double> val_epe;       // per epoch
  std::vector<double> best_so_far;   // running best of val_epe
  int best_epoch = -1;
};

// Trains the motion group alone (encoder/decoder untouched) to minimize the
// mean endpoint error between the dense prediction and the constant truth.
// Adam with its own learning rate: the end-to-end motion rate is far too
// timid for cold-start flow regression, and the 3e-3 default sits in the
// validated window (1e-2 already kills the hourglass ReLUs). Empty dataset
// -> invalid_argument.
PretrainResult pretrain_motion(const std::vector<FlowPair>& train_set,
                               const std::vector<FlowPair>& val_set,
                               NetParams params, const TrainConfig& cfg,
                               double lr = 3e-3);

// Synthetic patch-burst dataset: per burst, a fresh procedural HR scene of
// side patch*s degraded into T LR frames (random sub-pixel shifts, frame 0
// pinned). hr_truth and true_flows are kept.
std::vector<imaging::Burst> make_patch_dataset(int count,
                                               const imaging::BurstConfig& cfg,
                                               int patch, std::uint64_t seed);

// Translation pairs for motion pretraining: procedural scenes shifted by
// |u|,|v| <= max_shift LR pixels (bilinear warp, replicate boundary).
std::vector<FlowPair> make_flow_pairs(int count, int size, double max_shift,
                                      std::uint64_t seed);

}  // namespace burstsr::net
