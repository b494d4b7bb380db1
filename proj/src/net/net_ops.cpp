#include "net_ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "burstsr/common.hpp"
#include "burstsr/kernels.hpp"

namespace burstsr::net::ops {

namespace {

void transpose(const double* src, int rows, int cols, double* dst) {
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) dst[static_cast<std::size_t>(c) * rows + r] =
        src[static_cast<std::size_t>(r) * cols + c];
}

// Patch matrix: row per output pixel, column index (ky*ksize + kx)*in_ch + ci
// to line up with the ConvLayer weight layout. Out-of-image taps stay zero.
void im2col(const FeatureMap& in, const ConvLayer& layer,
            std::vector<double>& cols) {
  const ConvDims d = conv_dims(in, layer);
  const int ks = layer.ksize;
  const int C = in.depth;
  cols.assign(static_cast<std::size_t>(d.m) * d.k, 0.0);
  for (int oy = 0; oy < d.oh; ++oy) {
    for (int ox = 0; ox < d.ow; ++ox) {
      double* row =
          cols.data() + static_cast<std::size_t>(oy * d.ow + ox) * d.k;
      for (int ky = 0; ky < ks; ++ky) {
        const int y = oy * layer.stride - layer.pad + ky;
        if (y < 0 || y >= in.height) continue;
        for (int kx = 0; kx < ks; ++kx) {
          const int x = ox * layer.stride - layer.pad + kx;
          if (x < 0 || x >= in.width) continue;
          const double* src =
              in.data.data() + (static_cast<std::size_t>(y) * in.width + x) * C;
          std::memcpy(row + (static_cast<std::size_t>(ky) * ks + kx) * C, src,
                      static_cast<std::size_t>(C) * sizeof(double));
        }
      }
    }
  }
}

// Transpose of im2col: scatter-add patch-gradient rows back onto the input.
void col2im(const std::vector<double>& gcols, const ConvLayer& layer,
            FeatureMap& gin) {
  const ConvDims d = conv_dims(gin, layer);
  const int ks = layer.ksize;
  const int C = gin.depth;
  for (int oy = 0; oy < d.oh; ++oy) {
    for (int ox = 0; ox < d.ow; ++ox) {
      const double* row =
          gcols.data() + static_cast<std::size_t>(oy * d.ow + ox) * d.k;
      for (int ky = 0; ky < ks; ++ky) {
        const int y = oy * layer.stride - layer.pad + ky;
        if (y < 0 || y >= gin.height) continue;
        for (int kx = 0; kx < ks; ++kx) {
          const int x = ox * layer.stride - layer.pad + kx;
          if (x < 0 || x >= gin.width) continue;
          double* dst = gin.data.data() +
                        (static_cast<std::size_t>(y) * gin.width + x) * C;
          const double* g = row + (static_cast<std::size_t>(ky) * ks + kx) * C;
          for (int c = 0; c < C; ++c) dst[c] += g[c];
        }
      }
    }
  }
}

// Tap table for one axis of the x2 bilinear upsample (half-pixel centers).
struct Tap {
  int i0 = 0, i1 = 0;
  double f = 0.0;
};

std::vector<Tap> axis_taps(int out_n, int in_n) {
  std::vector<Tap> taps(static_cast<std::size_t>(out_n));
  for (int o = 0; o < out_n; ++o) {
    double s = 0.5 * (o + 0.5) - 0.5;
    if (s < 0.0) s = 0.0;
    int i0 = static_cast<int>(std::floor(s));
    if (i0 > in_n - 1) i0 = in_n - 1;
    taps[o].i0 = i0;
    taps[o].i1 = std::min(i0 + 1, in_n - 1);
    taps[o].f = s - i0;
  }
  return taps;
}

}  // namespace

ConvDims conv_dims(const FeatureMap& in, const ConvLayer& layer) {
  require_arg(in.depth == layer.in_ch, "conv: channel mismatch");
  ConvDims d;
  d.oh = (in.height + 2 * layer.pad - layer.ksize) / layer.stride + 1;
  d.ow = (in.width + 2 * layer.pad - layer.ksize) / layer.stride + 1;
  require_arg(d.oh >= 1 && d.ow >= 1, "conv: input smaller than kernel");
  d.m = d.oh * d.ow;
  d.k = layer.ksize * layer.ksize * layer.in_ch;
  return d;
}

FeatureMap conv_forward(const FeatureMap& in, const ConvLayer& layer) {
  const ConvDims d = conv_dims(in, layer);
  // training hammers these paths; reusing scratch keeps the allocator out of
  // the inner loop (capacity persists across calls)
  static thread_local std::vector<double> cols;
  im2col(in, layer, cols);
  FeatureMap out(d.oh, d.ow, layer.out_ch);
  kernels::gemm(d.m, layer.out_ch, d.k, cols.data(), layer.w.data(),
                out.data.data(), false);
  for (int r = 0; r < d.m; ++r) {
    double* row = out.data.data() + static_cast<std::size_t>(r) * layer.out_ch;
    for (int co = 0; co < layer.out_ch; ++co) row[co] += layer.b[co];
  }
  return out;
}

FeatureMap conv_backward(const FeatureMap& gout, const FeatureMap& in,
                         const ConvLayer& layer, ConvLayer& glayer,
                         bool want_gin) {
  const ConvDims d = conv_dims(in, layer);
  require_arg(gout.height == d.oh && gout.width == d.ow &&
                  gout.depth == layer.out_ch,
              "conv backward: gradient shape mismatch");

  for (int r = 0; r < d.m; ++r) {
    const double* row =
        gout.data.data() + static_cast<std::size_t>(r) * layer.out_ch;
    for (int co = 0; co < layer.out_ch; ++co) glayer.b[co] += row[co];
  }

  static thread_local std::vector<double> cols, cols_t, w_t, gcols;
  im2col(in, layer, cols);
  cols_t.resize(cols.size());
  transpose(cols.data(), d.m, d.k, cols_t.data());
  kernels::gemm(d.k, layer.out_ch, d.m, cols_t.data(), gout.data.data(),
                glayer.w.data(), true);

  if (!want_gin) return FeatureMap();
  w_t.resize(layer.w.size());
  transpose(layer.w.data(), d.k, layer.out_ch, w_t.data());
  gcols.assign(static_cast<std::size_t>(d.m) * d.k, 0.0);
  kernels::gemm(d.m, d.k, layer.out_ch, gout.data.data(), w_t.data(),
                gcols.data(), false);
  FeatureMap gin(in.height, in.width, in.depth);
  col2im(gcols, layer, gin);
  return gin;
}

void relu_inplace(FeatureMap& x) {
  kernels::relu_forward(x.data.data(), x.data.data(), x.data.size());
}

FeatureMap relu_backward(const FeatureMap& pre, const FeatureMap& g) {
  FeatureMap out(pre.height, pre.width, pre.depth);
  kernels::relu_backward(pre.data.data(), g.data.data(), out.data.data(),
                         pre.data.size());
  return out;
}

FeatureMap upsample2x(const FeatureMap& in) {
  const int oh = in.height * 2, ow = in.width * 2, C = in.depth;
  const auto ty = axis_taps(oh, in.height);
  const auto tx = axis_taps(ow, in.width);
  FeatureMap out(oh, ow, C);
  for (int oy = 0; oy < oh; ++oy) {
    const Tap& a = ty[oy];
    for (int ox = 0; ox < ow; ++ox) {
      const Tap& b = tx[ox];
      const double w00 = (1.0 - a.f) * (1.0 - b.f), w01 = (1.0 - a.f) * b.f;
      const double w10 = a.f * (1.0 - b.f), w11 = a.f * b.f;
      double* dst =
          out.data.data() + (static_cast<std::size_t>(oy) * ow + ox) * C;
      const double* r0 =
          in.data.data() + (static_cast<std::size_t>(a.i0) * in.width) * C;
      const double* r1 =
          in.data.data() + (static_cast<std::size_t>(a.i1) * in.width) * C;
      for (int c = 0; c < C; ++c)
        dst[c] = w00 * r0[b.i0 * C + c] + w01 * r0[b.i1 * C + c] +
                 w10 * r1[b.i0 * C + c] + w11 * r1[b.i1 * C + c];
    }
  }
  return out;
}

FeatureMap upsample2x_backward(const FeatureMap& gout, int in_h, int in_w) {
  const int C = gout.depth;
  require_arg(gout.height == in_h * 2 && gout.width == in_w * 2,
              "upsample backward: shape mismatch");
  const auto ty = axis_taps(gout.height, in_h);
  const auto tx = axis_taps(gout.width, in_w);
  FeatureMap gin(in_h, in_w, C);
  for (int oy = 0; oy < gout.height; ++oy) {
    const Tap& a = ty[oy];
    for (int ox = 0; ox < gout.width; ++ox) {
      const Tap& b = tx[ox];
      const double w00 = (1.0 - a.f) * (1.0 - b.f), w01 = (1.0 - a.f) * b.f;
      const double w10 = a.f * (1.0 - b.f), w11 = a.f * b.f;
      const double* g = gout.data.data() +
                        (static_cast<std::size_t>(oy) * gout.width + ox) * C;
      double* r0 = gin.data.data() + (static_cast<std::size_t>(a.i0) * in_w) * C;
      double* r1 = gin.data.data() + (static_cast<std::size_t>(a.i1) * in_w) * C;
      for (int c = 0; c < C; ++c) {
        r0[b.i0 * C + c] += w00 * g[c];
        r0[b.i1 * C + c] += w01 * g[c];
        r1[b.i0 * C + c] += w10 * g[c];
        r1[b.i1 * C + c] += w11 * g[c];
      }
    }
  }
  return gin;
}

FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b) {
  require_arg(a.height == b.height && a.width == b.width,
              "concat: spatial shape mismatch");
  FeatureMap out(a.height, a.width, a.depth + b.depth);
  const std::size_t n = static_cast<std::size_t>(a.height) * a.width;
  for (std::size_t p = 0; p < n; ++p) {
    std::memcpy(out.data.data() + p * out.depth, a.data.data() + p * a.depth,
                static_cast<std::size_t>(a.depth) * sizeof(double));
    std::memcpy(out.data.data() + p * out.depth + a.depth,
                b.data.data() + p * b.depth,
                static_cast<std::size_t>(b.depth) * sizeof(double));
  }
  return out;
}

FeatureMap raster_to_fmap(const Raster& r) {
  FeatureMap f(r.height, r.width, r.channels);
  f.data = r.data;
  return f;
}

Raster fmap_to_raster(const FeatureMap& f) {
  Raster r(f.height, f.width, f.depth);
  r.data = f.data;
  return r;
}

FeatureMap run_stack(const std::vector<ConvLayer>& layers,
                     const FeatureMap& in, int relu_count, StackTrace* tr) {
  FeatureMap cur = in;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (tr) tr->inputs.push_back(cur);
    FeatureMap out = conv_forward(cur, layers[i]);
    if (static_cast<int>(i) < relu_count) {
      if (tr) tr->pre.push_back(out);
      relu_inplace(out);
    } else if (tr) {
      tr->pre.emplace_back();  // placeholder keeps indices aligned
    }
    cur = std::move(out);
  }
  return cur;
}

FeatureMap backward_stack(const std::vector<ConvLayer>& layers,
                          const StackTrace& tr, const FeatureMap& gout,
                          std::vector<ConvLayer>& glayers, int relu_count,
                          bool need_input_grad) {
  require(tr.inputs.size() == layers.size() && tr.pre.size() == layers.size(),
          ErrorCode::state, "backward: stack trace missing");
  FeatureMap g = gout;
  for (int i = static_cast<int>(layers.size()) - 1; i >= 0; --i) {
    if (i < relu_count) g = relu_backward(tr.pre[i], g);
    const bool want = i > 0 || need_input_grad;
    g = conv_backward(g, tr.inputs[i], layers[i], glayers[i], want);
  }
  return g;
}

}  // namespace burstsr::net::ops
