#include <doctest.h>

#include "support.hpp"
#include "thermosig/resample.hpp"

#include <cmath>
#include <numbers>

using namespace thermosig;

namespace {

SampledSeries sampled(const Series& v, double rate) { return {v, Mask::Constant(v.size(), true), rate, 0.0}; }

}  // namespace

TEST_CASE("constant series stays constant") {
  const auto out = resample_to_timeline(sampled(Series::Constant(75, 5.0), 7.5), 30.0, InterpMethod::CubicSpline);
  CHECK(out.rate == 30.0);
  CHECK(out.size() == 74 * 4 + 1);
  CHECK(out.valid.all());
  CHECK((out.values.array() - 5.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("cubic upsampling of a slow sinusoid tracks the analytic curve") {
  const double f = 0.2, fs = 7.5;
  const Series x = tsupport::tone(600, f, fs);
  const auto out = resample_to_timeline(sampled(x, fs), 30.0, InterpMethod::CubicSpline);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < out.size(); ++k)
    worst = std::max(worst, std::abs(out.values[k] - std::sin(2 * std::numbers::pi * f * out.time_at(k))));
  CHECK(worst < 1e-3);
}

TEST_CASE("too few knots is a structured error") {
  try {
    resample_to_timeline(sampled(Series::Ones(3), 7.5), 30.0, InterpMethod::CubicSpline);
    FAIL("expected TooFewSamples");
  } catch (const TooFewSamples& e) {
    CHECK(e.required() == 4);
    CHECK(e.actual() == 3);
    CHECK(std::string(e.what()).find("too few samples") != std::string::npos);
  }
  CHECK_NOTHROW(resample_to_timeline(sampled(Series::Ones(3), 7.5), 30.0, InterpMethod::Linear));
}

TEST_CASE("non-finite input names the first bad index") {
  Series x = Series::Ones(20);
  x[7] = std::nan("");
  x[9] = INFINITY;
  try {
    resample_to_timeline(sampled(x, 7.5), 30.0, InterpMethod::CubicSpline);
    FAIL("expected NonFiniteValue");
  } catch (const NonFiniteValue& e) {
    CHECK(e.index() == 7);
  }
}

TEST_CASE("upsample then decimate reproduces the input") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Series x = tsupport::white(200, seed);
    const auto up = resample_to_timeline(sampled(x, 7.5), 30.0, InterpMethod::CubicSpline);
    REQUIRE(up.size() == 199 * 4 + 1);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(up.values[4 * i] - x[i]));
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("wide gaps stay invalid, narrow gaps are interpolated") {
  const double fs = 7.5;
  Series x = tsupport::tone(300, 0.1, fs);
  Mask valid = Mask::Constant(300, true);
  valid.segment(100, 30).setConstant(false);  // 4 s
  valid.segment(200, 10).setConstant(false);  // 1.33 s
  const auto out = resample_to_timeline({x, valid, fs, 0.0}, 30.0, InterpMethod::CubicSpline, 2.0);
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    const double t = out.time_at(k);
    if (t > 99.0 / fs + 1e-9 && t < 130.0 / fs - 1e-9) CHECK_FALSE(out.valid[k]);
    if (t > 199.0 / fs && t < 210.0 / fs) CHECK(out.valid[k]);
  }
}

TEST_CASE("validity is never gained outside documented interpolation") {
  // property: an output sample is valid only between two valid knots no more than max_gap apart
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    thermosig::GaussianSource g(seed);
    const Eigen::Index n = 120;
    Series x = tsupport::white(n, seed + 100);
    Mask valid(n);
    for (Eigen::Index i = 0; i < n; ++i) valid[i] = g.uniform() > 0.3;
    if (valid.count() < 4) continue;
    const double fs = 7.5, gap = 0.5;
    const auto out = resample_to_timeline({x, valid, fs, 0.0}, 30.0, InterpMethod::Linear, gap);
    for (Eigen::Index k = 0; k < out.size(); ++k) {
      if (!out.valid[k]) continue;
      const double t = out.time_at(k) * fs;
      const auto lo = static_cast<Eigen::Index>(std::floor(t + 1e-9));
      const auto hi = static_cast<Eigen::Index>(std::ceil(t - 1e-9));
      Eigen::Index a = lo, b = hi;
      while (a >= 0 && !valid[a]) --a;
      while (b < n && !valid[b]) ++b;
      REQUIRE(a >= 0);
      REQUIRE(b < n);
      CHECK((b - a) / fs <= gap + 1e-9);
    }
  }
}

TEST_CASE("hold and linear interpolation") {
  const Series x = (Series(4) << 0, 1, 2, 4).finished();
  const auto lin = resample_to_timeline(sampled(x, 1.0), 2.0, InterpMethod::Linear);
  CHECK(lin.values[5] == doctest::Approx(3.0));
  const auto hold = resample_to_timeline(sampled(x, 1.0), 2.0, InterpMethod::Hold);
  CHECK(hold.values[5] == doctest::Approx(2.0));
}

TEST_CASE("interp_linear clamps and flags queries outside the span") {
  const std::vector<double> t{0, 1, 2};
  const Series y = (Series(3) << 0, 10, 20).finished();
  const std::vector<double> q{-1, 0.5, 2.5};
  Mask inside;
  const Series v = interp_linear(t, y, q, &inside);
  CHECK(v[0] == 0);
  CHECK(v[1] == doctest::Approx(5));
  CHECK(v[2] == 20);
  CHECK_FALSE(inside[0]);
  CHECK(inside[1]);
  CHECK_FALSE(inside[2]);
}

TEST_CASE("bridge_gaps fills short runs and keeps long runs invalid") {
  Series v = (Series(10) << 9, 0, 2, 0, 0, 8, 0, 0, 0, 0).finished();
  Mask m = (Mask(10) << false, true, true, false, false, true, false, false, false, false).finished();
  v[1] = 0;
  bridge_gaps(v, m, 2);
  CHECK(v[0] == 0);  // leading hold
  CHECK_FALSE(m[0]);
  CHECK(v[3] == doctest::Approx(4));
  CHECK(v[4] == doctest::Approx(6));
  CHECK(m[3]);
  CHECK(m[4]);
  CHECK(v[9] == 8);  // trailing hold
  CHECK_FALSE(m[9]);

  Series w = (Series(6) << 0, 0, 0, 0, 0, 5).finished();
  Mask mw = (Mask(6) << true, false, false, false, false, true).finished();
  bridge_gaps(w, mw, 3);
  CHECK(w[2] == doctest::Approx(2));
  CHECK_FALSE(mw[2]);

  Mask none = Mask::Constant(3, false);
  Series z = Series::Zero(3);
  CHECK_THROWS_AS(bridge_gaps(z, none, 2), InvalidArgument);
}
