#pragma once

#include <vector>

#include "burstsr/misr_net.hpp"
#include "burstsr/raster.hpp"
#include "burstsr/spmc.hpp"

// Building blocks for the network: im2col convolution on interleaved-channel
// feature maps, ReLU, bilinear x2 upsampling, and the conv-stack drivers.
// All loops have a fixed accumulation order, so results are reproducible
// bit-for-bit for a given kernel backend.
namespace burstsr::net::ops {

using spmc::FeatureMap;

struct ConvDims {
  int oh = 0, ow = 0;
  int m = 0;  // output pixels
  int k = 0;  // patch length: ksize*ksize*in_ch
};

ConvDims conv_dims(const FeatureMap& in, const ConvLayer& layer);

FeatureMap conv_forward(const FeatureMap& in, const ConvLayer& layer);

// Accumulates weight/bias gradients into glayer; returns the input gradient
// when want_gin (empty map otherwise).
FeatureMap conv_backward(const FeatureMap& gout, const FeatureMap& in,
                         const ConvLayer& layer, ConvLayer& glayer,
                         bool want_gin);

void relu_inplace(FeatureMap& x);
FeatureMap relu_backward(const FeatureMap& pre, const FeatureMap& g);

// Half-pixel-convention bilinear doubling and its exact transpose.
FeatureMap upsample2x(const FeatureMap& in);
FeatureMap upsample2x_backward(const FeatureMap& gout, int in_h, int in_w);

FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b);
FeatureMap raster_to_fmap(const Raster& r);
Raster fmap_to_raster(const FeatureMap& f);

// Applies layers in order with ReLU after the first relu_count of them,
// recording per-layer inputs and pre-activations into tr when given.
FeatureMap run_stack(const std::vector<ConvLayer>& layers,
                     const FeatureMap& in, int relu_count, StackTrace* tr);

// Reverse pass over run_stack; accumulates into glayers and returns the
// gradient at the stack input when need_input_grad.
FeatureMap backward_stack(const std::vector<ConvLayer>& layers,
                          const StackTrace& tr, const FeatureMap& gout,
                          std::vector<ConvLayer>& glayers, int relu_count,
                          bool need_input_grad);

// Backprop through the hourglass for one frame's flow gradient; accumulates
// the motion-layer gradients into g.
void motion_backward(const FeatureMap& gflow, const NetParams& p,
                     const MotionTrace& tr, NetGrads& g);

}  // namespace burstsr::net::ops
