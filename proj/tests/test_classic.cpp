#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>

#include "burstsr/classic_sr.hpp"
#include "burstsr/common.hpp"
#include "burstsr/imaging.hpp"
#include "burstsr/scenes.hpp"
#include "burstsr/splat.hpp"
#include "doctest.h"

using namespace burstsr;
using namespace burstsr::imaging;
using namespace burstsr::classic;

namespace {
const double kInf = std::numeric_limits<double>::infinity();

bool throws_code(ErrorCode want, const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code() == want;
  }
  return false;
}

double l1(const Raster& a, const Raster& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    sum += std::fabs(a.data[i] - b.data[i]);
  return sum / static_cast<double>(a.data.size());
}

Raster band_limited_scene(int h, int w, std::uint64_t seed) {
  return convolve(scenes::make_scene(h, w, 1, seed), gaussian_psf(2.0, 6));
}

// Width of the gradient bump where a row crosses a vertical edge.
double row_edge_fwhm(const Raster& img, int row) {
  std::vector<double> d(img.width - 1);
  for (int x = 1; x < img.width; ++x)
    d[x - 1] = std::fabs(img.at(row, x) - img.at(row, x - 1));
  int p = 0;
  for (int i = 1; i < static_cast<int>(d.size()); ++i)
    if (d[i] > d[p]) p = i;
  const double half = d[p] / 2.0;
  double xl = p, xr = p;
  for (int i = p; i > 0; --i)
    if (d[i - 1] < half) {
      xl = (i - 1) + (half - d[i - 1]) / (d[i] - d[i - 1]);
      break;
    }
  for (int i = p; i + 1 < static_cast<int>(d.size()); ++i)
    if (d[i + 1] < half) {
      xr = i + (d[i] - half) / (d[i] - d[i + 1]);
      break;
    }
  return xr - xl;
}
}  // namespace

TEST_CASE("splat corners: partition of mass, border clipping") {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const double y = rng.uniform(-2.0, 12.0);
    const double x = rng.uniform(-2.0, 12.0);
    fuse::Corners c = fuse::splat_corners(y, x, 10, 10);
    double kept = 0.0;
    for (int i = 0; i < c.n; ++i) {
      kept += c.w[i];
      CHECK(c.w[i] > 0.0);
      CHECK(c.y[i] >= 0);
      CHECK(c.y[i] < 10);
      CHECK(c.x[i] >= 0);
      CHECK(c.x[i] < 10);
    }
    CHECK(kept + c.clipped == doctest::Approx(1.0).epsilon(1e-14));
  }
  // integer landing keeps a single unit corner
  fuse::Corners unit = fuse::splat_corners(3.0, 7.0, 10, 10);
  CHECK(unit.n == 1);
  CHECK(unit.w[0] == 1.0);
  CHECK(unit.clipped == 0.0);
  // fully outside clips everything
  fuse::Corners gone = fuse::splat_corners(-5.5, 3.0, 10, 10);
  CHECK(gone.n == 0);
  CHECK(gone.clipped == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("estimate_translation: identity, integer, subpixel, antisymmetry") {
  Raster scene = band_limited_scene(96, 96, 21);

  auto [dx0, dy0] = estimate_translation(scene, scene);
  CHECK(std::fabs(dx0) < 1e-6);
  CHECK(std::fabs(dy0) < 1e-6);

  Raster ishift = warp(scene, FlowField::uniform(96, 96, 3.0, -2.0));
  auto [dxi, dyi] = estimate_translation(scene, ishift, false);
  CHECK(dxi == 3.0);
  CHECK(dyi == -2.0);
  auto [dxr, dyr] = estimate_translation(scene, ishift, true);
  CHECK(std::fabs(dxr - 3.0) < 0.05);
  CHECK(std::fabs(dyr + 2.0) < 0.05);

  Raster sshift = warp(scene, FlowField::uniform(96, 96, 0.25, 0.5));
  auto [dxs, dys] = estimate_translation(scene, sshift);
  CHECK(std::fabs(dxs - 0.25) < 0.05);
  CHECK(std::fabs(dys - 0.5) < 0.05);

  auto [fx, fy] = estimate_translation(scene, sshift);
  auto [bx, by] = estimate_translation(sshift, scene);
  CHECK(std::fabs(fx + bx) < 0.05);
  CHECK(std::fabs(fy + by) < 0.05);

  Raster flat = Raster::constant(96, 96, 1, 5.0);
  CHECK(throws_code(ErrorCode::no_signal,
                    [&] { estimate_translation(flat, scene); }));
  CHECK(throws_code(ErrorCode::invalid_argument, [&] {
    estimate_translation(scene, Raster(32, 32, 1));
  }));
}

TEST_CASE("shift_and_add: single frame identity at s=1") {
  Raster hr = scenes::make_scene(14, 18, 2, 3);
  Burst b;
  b.frames = {hr};
  auto [out, wmap] = shift_and_add(b, std::vector<FlowField>{FlowField(14, 18)}, 1);
  CHECK(std::memcmp(out.data.data(), hr.data.data(),
                    hr.data.size() * sizeof(double)) == 0);
  for (double w : wmap.data) CHECK(w == 1.0);
}

TEST_CASE("shift_and_add: polyphase burst re-interleaves the HR image") {
  Raster hr = scenes::make_scene(32, 28, 1, 6);
  BurstConfig cfg;
  cfg.T = 4;
  cfg.s = 2;
  cfg.psf = delta_psf();
  cfg.motion.shifts = {{0, 0}, {0.5, 0}, {0, 0.5}, {0.5, 0.5}};
  cfg.snr = kInf;
  cfg.decimate_mode = DecimateMode::point_sample;
  Burst b = synthesize_burst(hr, cfg);
  auto [out, wmap] = shift_and_add(b, *b.true_flows, 2);
  CHECK(std::memcmp(out.data.data(), hr.data.data(),
                    hr.data.size() * sizeof(double)) == 0);
  for (double w : wmap.data) CHECK(w == 1.0);
}

TEST_CASE("shift_and_add: constant burst stays constant, any flows") {
  Burst b;
  for (int k = 0; k < 3; ++k) b.frames.push_back(Raster::constant(10, 10, 1, 4.5));
  std::vector<Translation> shifts = {{0, 0}, {0.37, 0.61}, {0.82, 0.13}};
  auto [out, wmap] = shift_and_add(b, shifts, 2);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 20; ++x)
      if (wmap.at(y, x) > 0.0)
        CHECK(out.at(y, x) == doctest::Approx(4.5).epsilon(1e-13));
}

TEST_CASE("shift_and_add: holes are infilled and flagged by zero weight") {
  Raster frame = scenes::make_scene(8, 8, 1, 1);
  Burst b;
  b.frames = {frame};
  auto [out, wmap] = shift_and_add(b, std::vector<FlowField>{FlowField(8, 8)}, 2);
  int holes = 0, covered = 0;
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      if (y % 2 == 0 && x % 2 == 0) {
        CHECK(wmap.at(y, x) == 1.0);
        CHECK(out.at(y, x) == frame.at(y / 2, x / 2));
        ++covered;
      } else {
        CHECK(wmap.at(y, x) == 0.0);
        ++holes;
      }
    }
  CHECK(covered == 64);
  CHECK(holes == 192);
  CHECK(out.all_finite());
}

TEST_CASE("shift_and_add: frame order cannot change a single bit") {
  Raster hr = scenes::make_scene(24, 24, 2, 12);
  BurstConfig cfg;
  cfg.T = 5;
  cfg.s = 2;
  cfg.psf = gaussian_psf(1.0, 3);
  cfg.seed = 7;
  Burst a = synthesize_burst(hr, cfg);

  Burst p;
  p.frames = {a.frames[0], a.frames[3], a.frames[1], a.frames[4], a.frames[2]};
  std::vector<FlowField> fa = *a.true_flows;
  std::vector<FlowField> fp = {fa[0], fa[3], fa[1], fa[4], fa[2]};

  auto [oa, wa] = shift_and_add(a, fa, 2);
  auto [op, wp] = shift_and_add(p, fp, 2);
  CHECK(std::memcmp(oa.data.data(), op.data.data(),
                    oa.data.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(wa.data.data(), wp.data.data(),
                    wa.data.size() * sizeof(double)) == 0);
}

TEST_CASE("shift_and_add: validation") {
  Burst empty;
  CHECK(throws_code(ErrorCode::empty_input, [&] {
    shift_and_add(empty, std::vector<FlowField>{}, 2);
  }));

  Burst one;
  one.frames = {Raster::constant(6, 6, 1, 1.0)};
  CHECK(throws_code(ErrorCode::invalid_argument, [&] {
    shift_and_add(one, std::vector<FlowField>{}, 2);  // flow count mismatch
  }));
  CHECK(throws_code(ErrorCode::invalid_argument, [&] {
    shift_and_add(one, std::vector<Translation>{{0.5, 0.0}}, 2);  // flow 0 not zero
  }));
}

TEST_CASE("deblur_wiener: delta kernel scaling and identity") {
  Raster img = scenes::make_scene(40, 33, 2, 8);
  Raster same = deblur_wiener(img, delta_psf(), 0.0);
  double scale = 0.0;
  for (double v : img.data) scale = std::max(scale, std::fabs(v));
  for (std::size_t i = 0; i < img.data.size(); ++i)
    CHECK(std::fabs(same.data[i] - img.data[i]) < 1e-12 * scale);

  Raster scaled = deblur_wiener(img, delta_psf(), 0.5);
  for (std::size_t i = 0; i < img.data.size(); ++i)
    CHECK(scaled.data[i] ==
          doctest::Approx(img.data[i] / 1.5).epsilon(1e-10));
}

TEST_CASE("deblur_wiener: recovers a band-limited image from known blur") {
  Raster truth = band_limited_scene(64, 64, 33);
  Psf g = gaussian_psf(1.0, 3);
  double lo = truth.data[0], hi = truth.data[0];
  for (double v : truth.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double range = hi - lo;

  // boundary-consistent blur: recovery holds over the whole frame
  Raster blurred = convolve(truth, g, Boundary::mirror);
  Raster recovered = deblur_wiener(blurred, g, 1e-6);
  double maxerr = 0.0;
  for (std::size_t i = 0; i < truth.data.size(); ++i)
    maxerr = std::max(maxerr, std::fabs(recovered.data[i] - truth.data[i]));
  CHECK(maxerr < 1e-3 * range);

  // replicate-boundary blur: recovery still holds away from the border
  Raster rec2 = deblur_wiener(convolve(truth, g), g, 1e-6);
  double interior_err = 0.0;
  for (int y = 8; y < 56; ++y)
    for (int x = 8; x < 56; ++x)
      interior_err =
          std::max(interior_err, std::fabs(rec2.at(y, x) - truth.at(y, x)));
  CHECK(interior_err < 1e-3 * range);
}

TEST_CASE("deblur_wiener: sharpens a blurred edge") {
  Raster edge = scenes::make_edge_scene(64, 64, 0.0, 0.0);
  Psf g = gaussian_psf(1.5, 5);
  Raster blurred = convolve(edge, g);
  Raster deblurred = deblur_wiener(blurred, g, 1e-4);
  CHECK(row_edge_fwhm(deblurred, 32) < row_edge_fwhm(blurred, 32));

  CHECK(throws_code(ErrorCode::invalid_argument,
                    [&] { deblur_wiener(edge, g, -0.1); }));
}

TEST_CASE("bicubic_upsample: identity, constant, affine reproduction") {
  Raster img = scenes::make_scene(12, 16, 2, 5);
  Raster same = bicubic_upsample(img, 1);
  CHECK(std::memcmp(same.data.data(), img.data.data(),
                    img.data.size() * sizeof(double)) == 0);

  Raster c = Raster::constant(9, 7, 1, 2.75);
  Raster cu = bicubic_upsample(c, 3);
  CHECK(cu.height == 27);
  CHECK(cu.width == 21);
  for (double v : cu.data) CHECK(v == doctest::Approx(2.75).epsilon(1e-12));

  Raster ramp(16, 12, 1);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 12; ++x) ramp.at(y, x) = 2.0 + 0.5 * x - 0.25 * y;
  Raster up = bicubic_upsample(ramp, 2);
  for (int Y = 2; Y <= 2 * 13; ++Y)
    for (int X = 2; X <= 2 * 9; ++X)
      CHECK(up.at(Y, X) ==
            doctest::Approx(2.0 + 0.5 * (X / 2.0) - 0.25 * (Y / 2.0))
                .epsilon(1e-12));

  Raster meta = Raster::constant(4, 4, 1, 1.0);
  meta.pixel_size_m = 300.0;
  Raster mu = bicubic_upsample(meta, 2);
  REQUIRE(mu.pixel_size_m.has_value());
  CHECK(*mu.pixel_size_m == doctest::Approx(150.0));
}

TEST_CASE("classic_sr: polyphase burst with true flows is recovered exactly") {
  Raster hr = scenes::make_scene(32, 28, 1, 6);
  BurstConfig cfg;
  cfg.T = 4;
  cfg.s = 2;
  cfg.psf = delta_psf();
  cfg.motion.shifts = {{0, 0}, {0.5, 0}, {0, 0.5}, {0.5, 0.5}};
  cfg.snr = kInf;
  cfg.decimate_mode = DecimateMode::point_sample;
  Burst b = synthesize_burst(hr, cfg);

  ClassicParams params;
  params.wiener_nsr = 0.0;
  params.psf = delta_psf();
  Raster out = classic_sr(b, 2, params);
  double maxerr = 0.0;
  for (std::size_t i = 0; i < hr.data.size(); ++i)
    maxerr = std::max(maxerr, std::fabs(out.data[i] - hr.data[i]));
  CHECK(maxerr < 1e-9);
}

TEST_CASE("classic_sr: single-frame degenerate path") {
  Raster hr = scenes::make_scene(24, 24, 1, 9);
  BurstConfig cfg;
  cfg.T = 1;
  cfg.s = 2;
  cfg.psf = gaussian_psf(1.0, 3);
  cfg.motion.shifts = {{0, 0}};
  cfg.snr = kInf;
  Burst b = synthesize_burst(hr, cfg);
  Raster out = classic_sr(b, 2);
  CHECK(out.height == 24);
  CHECK(out.width == 24);
  CHECK(out.all_finite());
}

TEST_CASE("classic_sr: beats bicubic on a well-spread noiseless burst") {
  Raster hr = scenes::make_scene(128, 128, 1, 44);
  BurstConfig cfg;
  cfg.T = 8;
  cfg.s = 2;
  cfg.psf = gaussian_psf(1.0, 3);
  cfg.motion.shifts = {{0, 0},       {0.5, 0},     {0, 0.5},     {0.5, 0.5},
                       {0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}};
  cfg.snr = kInf;
  Burst b = synthesize_burst(hr, cfg);
  Raster truth = *b.hr_truth;
  Raster baseline = bicubic_upsample(b.frames[0], 2);

  ClassicParams params;
  params.psf = gaussian_psf(1.0, 3);
  params.wiener_nsr = 1e-4;

  // estimated flows
  Burst stripped = b;
  stripped.true_flows.reset();
  Raster est = classic_sr(stripped, 2, params);
  CHECK(l1(est, truth) < l1(baseline, truth));

  // true flows do at least as well
  Raster sup = classic_sr(b, 2, params);
  CHECK(l1(sup, truth) < l1(baseline, truth));
}

TEST_CASE("classic_sr: validation") {
  Burst empty;
  CHECK(throws_code(ErrorCode::empty_input, [&] { classic_sr(empty, 2); }));

  Burst one;
  one.frames = {scenes::make_scene(8, 8, 1, 1)};
  ClassicParams bad;
  bad.splat_radius = 2;
  CHECK(throws_code(ErrorCode::invalid_argument,
                    [&] { classic_sr(one, 2, bad); }));
  ClassicParams neg;
  neg.wiener_nsr = -1.0;
  CHECK(throws_code(ErrorCode::invalid_argument,
                    [&] { classic_sr(one, 2, neg); }));
}
