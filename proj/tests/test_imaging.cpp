#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>

#include "burstsr/common.hpp"
#include "burstsr/imaging.hpp"
#include "burstsr/scenes.hpp"
#include "doctest.h"

using namespace burstsr;
using namespace burstsr::imaging;

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
}  // namespace

TEST_CASE("gaussian_psf: delta limit, closed form, normalization, errors") {
  Psf near_delta = gaussian_psf(1e-6, 1);
  CHECK(near_delta.tap(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::fabs(near_delta.tap(0, 1)) < 1e-12);

  Psf g = gaussian_psf(0.5, 2);
  double sum = 0.0;
  for (double t : g.taps) sum += t;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  // taps match exp(-(x^2+y^2)/(2*0.25)) renormalized
  double norm = 0.0;
  for (int dy = -2; dy <= 2; ++dy)
    for (int dx = -2; dx <= 2; ++dx)
      norm += std::exp(-(dx * dx + dy * dy) / 0.5);
  for (int dy = -2; dy <= 2; ++dy)
    for (int dx = -2; dx <= 2; ++dx)
      CHECK(g.tap(dy, dx) ==
            doctest::Approx(std::exp(-(dx * dx + dy * dy) / 0.5) / norm)
                .epsilon(1e-12));
  // symmetry
  CHECK(g.tap(1, 2) == g.tap(-1, -2));
  CHECK(g.tap(2, 1) == g.tap(1, 2));

  CHECK(throws_code(ErrorCode::invalid_argument,
                    [] { gaussian_psf(0.0, 2); }));
  CHECK(throws_code(ErrorCode::invalid_argument,
                    [] { gaussian_psf(-1.0, 5); }));
  CHECK(throws_code(ErrorCode::invalid_argument,
                    [] { gaussian_psf(1.0, 2); }));  // radius < ceil(3*sigma)
}

TEST_CASE("mtf_of_psf: delta identity, Gaussian closed form, monotone") {
  Psf d = delta_psf();
  for (double f : {0.0, 0.1, 0.5, 0.75})
    CHECK(mtf_of_psf(d, f) == doctest::Approx(1.0).epsilon(1e-12));

  // sigma = 0.5 LR px realized on the 2x-oversampled HR grid (sigma 1.0 in
  // tap units); the closed form exp(-2 pi^2 sigma_lr^2 f^2) at f = 0.75
  const double analytic =
      std::exp(-2.0 * M_PI * M_PI * 0.25 * 0.5625);  // ~0.0623
  const double coarse = mtf_of_psf(gaussian_psf(1.0, 3), 0.75, 2);
  const double fine = mtf_of_psf(gaussian_psf(1.0, 8), 0.75, 2);
  CHECK(std::fabs(coarse - analytic) < 5e-3);
  CHECK(std::fabs(fine - analytic) < 1e-3);  // converges as radius grows
  CHECK(mtf_of_psf(gaussian_psf(1.0, 8), 0.0, 2) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // monotone decreasing up to the tap grid's Nyquist
  Psf g = gaussian_psf(0.8, 3);
  double prev = 2.0;
  for (double f = 0.0; f <= 0.5001; f += 0.025) {
    const double m = mtf_of_psf(g, f);
    CHECK(m < prev + 1e-12);
    prev = m;
  }
}

TEST_CASE("warp: identity, integer shift, subpixel ramp, errors") {
  Rng rng(11);
  Raster img(12, 17, 2);
  for (double& v : img.data) v = rng.uniform(0.0, 2.0);

  Raster same = warp(img, FlowField(12, 17));
  for (std::size_t i = 0; i < img.data.size(); ++i)
    CHECK(same.data[i] == img.data[i]);

  // integer flow (3, -2): out(y, x) = img(y - 2, x + 3) on interior
  Raster shifted = warp(img, FlowField::uniform(12, 17, 3.0, -2.0));
  for (int y = 2; y < 12; ++y)
    for (int x = 0; x < 17 - 3; ++x)
      for (int c = 0; c < 2; ++c)
        CHECK(shifted.at(y, x, c) == doctest::Approx(img.at(y - 2, x + 3, c))
                                         .epsilon(1e-14));

  // half-pixel flow on a linear horizontal ramp
  Raster ramp(8, 16, 1);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 16; ++x) ramp.at(y, x) = 3.0 + 0.25 * x;
  Raster half = warp(ramp, FlowField::uniform(8, 16, 0.5, 0.0));
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 15; ++x)
      CHECK(half.at(y, x) ==
            doctest::Approx(3.0 + 0.25 * (x + 0.5)).epsilon(1e-14));

  CHECK(throws_code(ErrorCode::invalid_argument,
                    [&] { warp(img, FlowField(5, 5)); }));
}

TEST_CASE("convolve: delta, constants, Gaussian semigroup, errors") {
  Rng rng(3);
  Raster img(20, 24, 1);
  for (double& v : img.data) v = rng.uniform(0.0, 1.0);

  Raster ident = convolve(img, delta_psf());
  for (std::size_t i = 0; i < img.data.size(); ++i)
    CHECK(ident.data[i] == img.data[i]);

  Psf box;
  box.radius = 1;
  box.taps.assign(9, 1.0 / 9.0);
  Raster ones = Raster::constant(3, 3, 1, 1.0);
  CHECK(convolve(ones, box).at(1, 1) == doctest::Approx(1.0).epsilon(1e-12));

  // Gaussian sigma1 then sigma2 ~= single Gaussian sqrt(s1^2+s2^2)
  Raster scene = scenes::make_scene(48, 48, 1, 77);
  const double s1 = 1.0, s2 = 1.5;
  Raster two = convolve(convolve(scene, gaussian_psf(s1, 4)),
                        gaussian_psf(s2, 6));
  Raster one = convolve(
      scene, gaussian_psf(std::sqrt(s1 * s1 + s2 * s2), 7));
  double maxerr = 0.0;
  for (int y = 10; y < 38; ++y)
    for (int x = 10; x < 38; ++x)
      maxerr = std::max(maxerr, std::fabs(two.at(y, x) - one.at(y, x)));
  CHECK(maxerr < 1e-3);

  CHECK(throws_code(ErrorCode::invalid_argument, [&] {
    convolve(Raster(3, 3, 1), gaussian_psf(1.0, 3));
  }));
}

TEST_CASE("decimate: identity, block mean, point mode, constants, errors") {
  Raster img(2, 2, 1);
  img.at(0, 0) = 1.0;
  img.at(0, 1) = 2.0;
  img.at(1, 0) = 3.0;
  img.at(1, 1) = 4.0;
  CHECK(decimate(img, 2).at(0, 0) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(decimate(img, 1).at(0, 1) == 2.0);
  CHECK(decimate(img, 2, DecimateMode::point_sample).at(0, 0) == 1.0);

  Raster c = Raster::constant(6, 6, 2, 3.25);
  Raster dc = decimate(c, 3);
  for (double v : dc.data) CHECK(v == doctest::Approx(3.25).epsilon(1e-15));

  CHECK(throws_code(ErrorCode::invalid_argument,
                    [&] { decimate(Raster(5, 4, 1), 2); }));
}

TEST_CASE("add_noise: noiseless, determinism, sample statistics") {
  Raster img = Raster::constant(512, 512, 1, 100.0);

  Raster clean = add_noise(img, kInf, 9);
  for (std::size_t i = 0; i < img.data.size(); ++i)
    CHECK(clean.data[i] == img.data[i]);

  Raster n1 = add_noise(img, 800.0, 42);
  Raster n2 = add_noise(img, 800.0, 42);
  CHECK(std::memcmp(n1.data.data(), n2.data.data(),
                    n1.data.size() * sizeof(double)) == 0);

  // std within 5% of mean/snr = 0.125, mean within 3 sigma / sqrt(N)
  const double want_std = 100.0 / 800.0;
  double sum = 0.0, sum2 = 0.0;
  const double n = static_cast<double>(img.data.size());
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const double d = n1.data[i] - img.data[i];
    sum += d;
    sum2 += d * d;
  }
  const double mean = sum / n;
  const double stddev = std::sqrt(sum2 / n - mean * mean);
  CHECK(std::fabs(stddev - want_std) < 0.05 * want_std);
  CHECK(std::fabs(mean) < 3.0 * want_std / std::sqrt(n));

  CHECK(throws_code(ErrorCode::invalid_argument,
                    [&] { add_noise(img, 0.0, 1); }));
}

TEST_CASE("synthesize_burst: identity config reproduces hr") {
  Raster hr = scenes::make_scene(24, 20, 2, 5);
  BurstConfig cfg;
  cfg.T = 3;
  cfg.s = 1;
  cfg.psf = delta_psf();
  cfg.motion.shifts = {{0, 0}, {0, 0}, {0, 0}};
  cfg.snr = kInf;
  Burst b = synthesize_burst(hr, cfg);
  REQUIRE(b.frame_count() == 3);
  for (const Raster& f : b.frames)
    for (std::size_t i = 0; i < hr.data.size(); ++i)
      CHECK(f.data[i] == hr.data[i]);
  CHECK(b.hr_truth.has_value());
  CHECK(b.true_flows.has_value());
  CHECK((*b.true_flows)[0].is_zero());
}

TEST_CASE("synthesize_burst: polyphase components interleave back to hr") {
  Raster hr = scenes::make_scene(32, 28, 1, 6);
  BurstConfig cfg;
  cfg.T = 4;
  cfg.s = 2;
  cfg.psf = delta_psf();
  cfg.motion.shifts = {{0, 0}, {0.5, 0}, {0, 0.5}, {0.5, 0.5}};
  cfg.snr = kInf;
  cfg.decimate_mode = DecimateMode::point_sample;
  Burst b = synthesize_burst(hr, cfg);
  // frame k, LR pixel (y, x) carries hr(2y + 2*sy_k, 2x + 2*sx_k)
  double maxerr = 0.0;
  for (int k = 0; k < 4; ++k) {
    const int ox = static_cast<int>(2.0 * cfg.motion.shifts[k].first);
    const int oy = static_cast<int>(2.0 * cfg.motion.shifts[k].second);
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 14; ++x) {
        const int hy = 2 * y + oy;
        const int hx = 2 * x + ox;
        if (hy >= 32 || hx >= 28) continue;  // replicate edge, skip
        maxerr = std::max(maxerr, std::fabs(b.frames[k].at(y, x) -
                                            hr.at(hy, hx)));
      }
  }
  CHECK(maxerr < 1e-12);
}

TEST_CASE("synthesize_burst: measured flat-region snr near 800") {
  Raster hr = Raster::constant(512, 512, 1, 100.0);
  BurstConfig cfg;
  cfg.T = 1;
  cfg.s = 2;
  cfg.psf = delta_psf();
  cfg.motion.shifts = {{0, 0}};
  cfg.snr = 800.0;
  cfg.seed = 31;
  Burst b = synthesize_burst(hr, cfg);
  double sum = 0.0, sum2 = 0.0;
  for (double v : b.frames[0].data) {
    sum += v - 100.0;
    sum2 += (v - 100.0) * (v - 100.0);
  }
  const double n = static_cast<double>(b.frames[0].data.size());
  const double stddev = std::sqrt(sum2 / n - (sum / n) * (sum / n));
  const double measured_snr = 100.0 / stddev;
  CHECK(std::fabs(measured_snr - 800.0) < 0.05 * 800.0);
}

TEST_CASE("synthesize_burst: random shifts drawn when unspecified") {
  Raster hr = scenes::make_scene(16, 16, 1, 2);
  BurstConfig cfg;
  cfg.T = 5;
  cfg.s = 2;
  cfg.psf = delta_psf();
  cfg.snr = kInf;
  cfg.seed = 1234;
  Burst a = synthesize_burst(hr, cfg);
  Burst b = synthesize_burst(hr, cfg);
  REQUIRE(a.frame_count() == 5);
  CHECK((*a.true_flows)[0].is_zero());
  CHECK(!(*a.true_flows)[1].is_zero());
  for (int k = 0; k < 5; ++k)
    CHECK(std::memcmp(a.frames[k].data.data(), b.frames[k].data.data(),
                      a.frames[k].data.size() * sizeof(double)) == 0);
}

TEST_CASE("feasibility math: required samples and shift") {
  CHECK(required_samples(2) == 4);
  CHECK(required_shift(2) == 0.5);
  CHECK(required_samples(1) == 1);
  CHECK(required_shift(1) == 1.0);
  CHECK(required_samples(3) == 9);
  CHECK(required_shift(3) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  for (int s = 1; s <= 8; ++s) CHECK(required_shift(s) * s == 1.0);
  CHECK(throws_code(ErrorCode::invalid_argument, [] { required_samples(0); }));
}

TEST_CASE("phase_coverage: quarter phases, degenerate, counting") {
  PhaseCoverage full =
      phase_coverage({{0, 0}, {0.5, 0}, {0, 0.5}, {0.5, 0.5}}, 2);
  CHECK(full.all_occupied);
  for (int c : full.counts) CHECK(c == 1);

  std::vector<std::pair<double, double>> zeros(24, {0.0, 0.0});
  PhaseCoverage degen = phase_coverage(zeros, 2);
  CHECK(!degen.all_occupied);
  CHECK(degen.counts[0] == 24);
  CHECK(degen.counts[1] == 0);

  Rng rng(8);
  std::vector<std::pair<double, double>> random;
  for (int i = 0; i < 24; ++i)
    random.emplace_back(rng.uniform(), rng.uniform());
  PhaseCoverage cov = phase_coverage(random, 2);
  int total = 0;
  for (int c : cov.counts) total += c;
  CHECK(total == 24);

  // negative shifts use the fractional phase
  PhaseCoverage neg = phase_coverage({{-0.25, 0.0}}, 2);
  CHECK(neg.counts[1] == 1);  // frac(-0.25) = 0.75 -> cell x=1
}

TEST_CASE("bin_gac: hand arithmetic, constant, metadata, composition") {
  Raster img(3, 3, 1);
  for (int i = 0; i < 9; ++i) img.data[i] = i + 1.0;
  img.pixel_size_m = 360.0;
  Raster g = bin_gac(img, 3);
  CHECK(g.at(0, 0) == doctest::Approx(5.0).epsilon(1e-15));
  REQUIRE(g.pixel_size_m.has_value());
  CHECK(*g.pixel_size_m == doctest::Approx(1080.0));

  Raster c = Raster::constant(9, 9, 1, 7.5);
  for (double v : bin_gac(c, 3).data)
    CHECK(v == doctest::Approx(7.5).epsilon(1e-15));

  // decimate(s) then bin(f) == decimate(s*f)
  Raster scene = scenes::make_scene(36, 24, 2, 9);
  Raster ab = bin_gac(decimate(scene, 2), 3);
  Raster direct = decimate(scene, 6);
  for (std::size_t i = 0; i < ab.data.size(); ++i)
    CHECK(ab.data[i] == doctest::Approx(direct.data[i]).epsilon(1e-12));
}

TEST_CASE("make_scene: deterministic, finite, positive, banded") {
  Raster a = scenes::make_scene(40, 32, 3, 17);
  Raster b = scenes::make_scene(40, 32, 3, 17);
  CHECK(std::memcmp(a.data.data(), b.data.data(),
                    a.data.size() * sizeof(double)) == 0);
  CHECK(a.all_finite());
  for (double v : a.data) CHECK(v > 0.0);
  // bands are not identical copies
  bool distinct = false;
  for (int y = 0; y < 40 && !distinct; ++y)
    for (int x = 0; x < 32 && !distinct; ++x)
      if (std::fabs(a.at(y, x, 0) - a.at(y, x, 1)) > 1e-9) distinct = true;
  CHECK(distinct);
  Raster c = scenes::make_scene(40, 32, 3, 18);
  CHECK(std::memcmp(a.data.data(), c.data.data(),
                    a.data.size() * sizeof(double)) != 0);
}

TEST_CASE("edge scene: step heights and blur smoothing") {
  Raster sharp = scenes::make_edge_scene(32, 32, 5.0, 0.0);
  double lo = 1e9, hi = -1e9;
  for (double v : sharp.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo == doctest::Approx(0.2));
  CHECK(hi == doctest::Approx(1.8));
  Raster soft = scenes::make_edge_scene(32, 32, 5.0, 1.0);
  // blurred edge has intermediate values
  bool intermediate = false;
  for (double v : soft.data)
    if (v > 0.5 && v < 1.5) intermediate = true;
  CHECK(intermediate);
}
