#include <doctest.h>

#include "support.hpp"
#include "thermosig/dsp.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>

using namespace thermosig;
using tsupport::rms;
using tsupport::tone;

namespace {

constexpr double kPi = std::numbers::pi;

// transfer function evaluated directly from the polynomial coefficients
double poly_magnitude(const IirFilter& f, double hz, double fs) {
  const std::complex<double> zinv = std::polar(1.0, -2 * kPi * hz / fs);
  std::complex<double> num = 0, den = 0, p = 1;
  for (Eigen::Index i = 0; i < std::max(f.b.size(), f.a.size()); ++i) {
    if (i < f.b.size()) num += f.b[i] * p;
    if (i < f.a.size()) den += f.a[i] * p;
    p *= zinv;
  }
  return std::abs(num / den);
}

// bilinear-transformed analog Butterworth lowpass, squared magnitude
double butter_lp_mag(double hz, double fc, double fs, int order) {
  const double r = std::tan(kPi * hz / fs) / std::tan(kPi * fc / fs);
  return 1.0 / std::sqrt(1.0 + std::pow(r, 2 * order));
}

std::vector<FilterDesign> pipeline_designs() {
  using F = FilterFamily;
  return {FilterDesign::lowpass(F::Butterworth, 3, 0.05, 30.0), FilterDesign::lowpass(F::Bessel, 3, 0.05, 30.0),
          FilterDesign::bandpass(F::Butterworth, 4, 0.05, 3.0, 30.0), FilterDesign::lowpass(F::Butterworth, 4, 0.03, 7.5),
          FilterDesign::bandpass(F::Butterworth, 4, 0.3, 4.0, 30.0), FilterDesign::bandpass(F::Butterworth, 4, 1.0, 3.5, 30.0),
          FilterDesign::bandpass(F::Butterworth, 4, 0.12, 2.0, 30.0)};
}

}  // namespace

TEST_CASE("Butterworth lowpass: cutoff, DC gain and analog oracle") {
  for (int order : {1, 2, 3, 4, 6}) {
    for (double fc : {0.05, 0.5, 3.0}) {
      const IirFilter f = design_iir(FilterDesign::lowpass(FilterFamily::Butterworth, order, fc, 30.0));
      CHECK(f.a[0] == doctest::Approx(1.0));
      CHECK(f.magnitude(fc) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
      CHECK(std::abs(f.magnitude(0.0) - 1.0) < 1e-9);
      for (double hz : {0.001, 0.3 * fc, fc, 2.0 * fc, 5.0 * fc}) {
        if (hz >= 15.0) continue;
        CHECK(f.magnitude(hz) == doctest::Approx(butter_lp_mag(hz, fc, 30.0, order)).epsilon(1e-6));
      }
    }
  }
  const IirFilter f3 = design_iir(FilterDesign::lowpass(FilterFamily::Butterworth, 3, 0.05, 30.0));
  CHECK(std::abs(f3.magnitude(0.05) - 0.70710678) < 1e-4);
}

TEST_CASE("Butterworth bandpass passes the middle and blocks DC") {
  const IirFilter f = design_iir(FilterDesign::bandpass(FilterFamily::Butterworth, 4, 1.0, 3.5, 30.0));
  CHECK(poly_magnitude(f, 0.0, 30.0) < 1e-6);
  CHECK(poly_magnitude(f, 2.1, 30.0) > 0.9);
  CHECK(f.magnitude(1.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
  CHECK(f.magnitude(3.5) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
  // sections and polynomial agree
  for (double hz = 0.1; hz < 15.0; hz += 0.37) CHECK(f.magnitude(hz) == doctest::Approx(poly_magnitude(f, hz, 30.0)).epsilon(1e-6));
}

TEST_CASE("Bessel lowpass is -3 dB at the cutoff") {
  for (int order : {2, 3, 4}) {
    const IirFilter f = design_iir(FilterDesign::lowpass(FilterFamily::Bessel, order, 0.05, 30.0));
    CHECK(f.magnitude(0.05) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
    CHECK(std::abs(f.magnitude(0.0) - 1.0) < 1e-9);
    CHECK(f.max_pole_modulus() < 1.0);
  }
}

TEST_CASE("every pipeline filter is stable") {
  for (const auto& d : pipeline_designs()) {
    const IirFilter f = design_iir(d);
    CHECK(f.max_pole_modulus() < 1.0 - 1e-9);
  }
}

TEST_CASE("design errors") {
  CHECK_THROWS_AS(design_iir(FilterDesign::lowpass(FilterFamily::Butterworth, 3, 15.0, 30.0)), InvalidArgument);
  CHECK_THROWS_AS(design_iir(FilterDesign::lowpass(FilterFamily::Butterworth, 0, 1.0, 30.0)), InvalidArgument);
  CHECK_THROWS_AS(design_iir(FilterDesign::bandpass(FilterFamily::Butterworth, 2, 3.0, 1.0, 30.0)), InvalidArgument);
  CHECK_THROWS_AS(design_iir(FilterDesign::bandpass(FilterFamily::Butterworth, 2, 1.0, 16.0, 30.0)), InvalidArgument);
}

TEST_CASE("filtfilt is zero-phase") {
  const double fs = 30.0;
  const IirFilter f = design_iir(FilterDesign::lowpass(FilterFamily::Butterworth, 3, 0.05, fs));
  const Series x = tone(18000, 0.02, fs);
  const Series y = filtfilt(f, x);
  // lag of the cross-correlation peak, searched over +-2 s
  int best = 0;
  double best_r = -1e300;
  const Eigen::Index n = x.size(), margin = 3000;
  for (int lag = -60; lag <= 60; ++lag) {
    double r = 0;
    for (Eigen::Index i = margin; i < n - margin; ++i) r += x[i] * y[i + lag];
    if (r > best_r) {
      best_r = r;
      best = lag;
    }
  }
  CHECK(std::abs(best) <= 1);
}

TEST_CASE("filtfilt DC, stopband and magnitude-squared") {
  const double fs = 30.0;
  const IirFilter f = design_iir(FilterDesign::lowpass(FilterFamily::Butterworth, 3, 0.05, fs));
  const Series dc = filtfilt(f, Series::Constant(3000, 3.3));
  CHECK((dc.array() - 3.3).abs().maxCoeff() < 1e-9);

  // steady state, past the start-up transient of a 0.05 Hz pole pair
  const Series x = tone(9000, 2.0, fs);
  CHECK(rms(filtfilt(f, x).segment(900, 7200)) < 1e-3 * rms(x));

  // a tone at the cutoff comes out at |H|^2 = 1/2 of its amplitude
  const IirFilter g = design_iir(FilterDesign::lowpass(FilterFamily::Butterworth, 4, 1.0, fs));
  const Series t = tone(30000, 1.0, fs);
  const Series ty = filtfilt(g, t);
  CHECK(rms(ty.segment(3000, 24000)) / rms(t.segment(3000, 24000)) == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("filtfilt commutes with time reversal") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (const auto& d : pipeline_designs()) {
      const IirFilter f = design_iir(d);
      const Series x = tsupport::white(2000, seed);
      const Series a = filtfilt(f, x.reverse().eval());
      const Series b = filtfilt(f, x).reverse();
      CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("filtfilt needs more samples than its padding") {
  const IirFilter f = design_iir(FilterDesign::lowpass(FilterFamily::Butterworth, 3, 0.05, 30.0));
  CHECK(f.pad_length() == 9);
  try {
    filtfilt(f, Series::Ones(9));
    FAIL("expected TooFewSamples");
  } catch (const TooFewSamples& e) {
    CHECK(e.required() == 10);
  }
  CHECK_NOTHROW(filtfilt(f, Series::Ones(10)));
}

TEST_CASE("sosfilt matches the difference equation") {
  const IirFilter f = design_iir(FilterDesign::lowpass(FilterFamily::Butterworth, 3, 2.0, 30.0));
  const Series x = tsupport::white(300, 4);
  Series y = Series::Zero(300);
  for (Eigen::Index n = 0; n < 300; ++n) {
    double acc = 0;
    for (Eigen::Index k = 0; k < f.b.size() && k <= n; ++k) acc += f.b[k] * x[n - k];
    for (Eigen::Index k = 1; k < f.a.size() && k <= n; ++k) acc -= f.a[k] * y[n - k];
    y[n] = acc;
  }
  CHECK((sosfilt(f, x) - y).cwiseAbs().maxCoeff() < 1e-9);
}

namespace {

// least-squares smoothing weights for the centre sample
Series savgol_oracle(Eigen::Index window, int order) {
  const Eigen::Index h = window / 2;
  Eigen::MatrixXd v(window, order + 1);
  for (Eigen::Index i = 0; i < window; ++i)
    for (int p = 0; p <= order; ++p) v(i, p) = std::pow(static_cast<double>(i - h), p);
  const Eigen::MatrixXd pinv = (v.transpose() * v).inverse() * v.transpose();
  return pinv.row(0).transpose();
}

}  // namespace

TEST_CASE("Savitzky-Golay coefficients and cubic reproduction") {
  for (Eigen::Index w : {5, 7, 31, 61}) CHECK((savgol_coefficients(w, 3) - savgol_oracle(w, 3)).cwiseAbs().maxCoeff() < 1e-10);

  Series cube(200);
  for (Eigen::Index i = 0; i < 200; ++i) cube[i] = std::pow(static_cast<double>(i), 3);
  const Series s = savgol(cube, 31, 3);
  for (Eigen::Index i = 0; i < 200; ++i) CHECK(std::abs(s[i] - cube[i]) <= 1e-6 * std::max(1.0, std::abs(cube[i])));

  CHECK((savgol(Series::Constant(100, 4.25), 31, 3).array() - 4.25).abs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(savgol(cube, 3, 3), InvalidArgument);
  CHECK_THROWS_AS(savgol(cube, 2, 3), InvalidArgument);  // bumped to 3, still not above the order
  CHECK((savgol(cube, 4, 3) - savgol(cube, 5, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Savitzky-Golay variance reduction on white noise") {
  // 30 s at 1 Hz -> 31 taps; interior variance ratio is the squared coefficient norm
  const double vrf = savgol_oracle(31, 3).squaredNorm();
  CHECK(vrf < 0.2);
  double in = 0, out = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Series x = tsupport::white(2000, seed);
    const Series y = savgol(x, 30.0, 3, 1.0);
    in += x.squaredNorm();
    out += y.segment(15, 1970).squaredNorm() * 2000.0 / 1970.0;
  }
  CHECK(out / in < 0.2);
  CHECK(out / in == doctest::Approx(vrf).epsilon(0.1));
}

TEST_CASE("odd window lengths") {
  CHECK(odd_window(30.0, 30.0) == 901);
  CHECK(odd_window(5.0, 30.0) == 151);
  CHECK(odd_window(30.0, 1.0) == 31);
  CHECK(odd_window(2.0, 1.0) == 3);
}

TEST_CASE("median, moving average and EMA") {
  const Series x = (Series(7) << 1, 9, 2, 8, 3, 7, 4).finished();
  const Series m = median_filter(x, 3);
  CHECK(m[0] == 1);  // window shrinks to one sample at the ends
  CHECK(m[1] == 2);
  CHECK(m[2] == 8);
  CHECK(m[3] == 3);
  CHECK(m[6] == 4);
  CHECK_THROWS_AS(median_filter(x, 4), InvalidArgument);

  const Series a = moving_average(x, 3);
  CHECK(a[0] == doctest::Approx(5.0));  // truncated window {1, 9}
  CHECK(a[1] == doctest::Approx(4.0));
  CHECK(a[6] == doctest::Approx(5.5));

  const Series e = exponential_moving_average((Series(3) << 0, 1, 1).finished(), 0.15);
  CHECK(e[0] == 0);
  CHECK(e[1] == doctest::Approx(0.15));
  CHECK(e[2] == doctest::Approx(0.2775));
  CHECK_THROWS_AS(exponential_moving_average(x, 0.0), InvalidArgument);
}

TEST_CASE("median filter removes isolated spikes") {
  Series x = Series::Constant(300, 10.0);
  x[100] = 1e6;
  x[200] = -1e6;
  CHECK((median_filter(x, 151).array() == 10.0).all());
}

TEST_CASE("Hilbert envelope of tones and AM signals") {
  const double fs = 30.0;
  const Eigen::Index n = 3000;
  const Series env = hilbert_envelope(tone(n, 1.0, fs, 2.0));
  for (Eigen::Index i = 30; i < n - 30; ++i) CHECK(std::abs(env[i] - 2.0) < 0.04);

  Series am(n), expect(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    expect[i] = 1 + 0.5 * std::sin(2 * kPi * 0.05 * t);
    am[i] = expect[i] * std::sin(2 * kPi * t);
  }
  const Series ea = hilbert_envelope(am);
  for (Eigen::Index i = n / 10; i < n - n / 10; ++i) CHECK(std::abs(ea[i] - expect[i]) < 0.05 * expect[i]);

  CHECK(hilbert_envelope(Series::Zero(128)).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(hilbert_envelope(Series::Zero(63)), TooFewSamples);
}

TEST_CASE("db4 filter bank") {
  const auto& h = db4_lowpass();
  double sum = 0, energy = 0;
  for (double c : h) {
    sum += c;
    energy += c * c;
  }
  CHECK(sum == doctest::Approx(std::sqrt(2.0)));
  CHECK(energy == doctest::Approx(1.0));
  // orthogonality to even shifts
  for (int s = 2; s < 8; s += 2) {
    double d = 0;
    for (int i = 0; i + s < 8; ++i) d += h[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i + s)];
    CHECK(std::abs(d) < 1e-10);
  }

  for (Eigen::Index n : {16, 17, 100, 101}) {
    const Series x = tsupport::white(n, static_cast<std::uint64_t>(n));
    const DwtLevel l = dwt_step(x);
    CHECK(l.approx.size() == (n + 7) / 2);
    CHECK((idwt_step(l.approx, l.detail, n) - x).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("wavelet approximation keeps slow content") {
  CHECK(wavelet_level(30.0, 0.05) == 9);
  CHECK(wavelet_level(7.5, 0.05) == 7);

  const double fs = 30.0;
  const Eigen::Index n = 18000;
  const Series c = dwt_approx(Series::Constant(n, 2.5), fs);
  CHECK((c.array() - 2.5).abs().maxCoeff() < 1e-9);

  Series ramp(n);
  for (Eigen::Index i = 0; i < n; ++i) ramp[i] = 100.0 + 0.01 * static_cast<double>(i);
  const Series r = dwt_approx(ramp, fs);
  // boundary extension reaches about 7 * 2^9 samples into the signal
  for (Eigen::Index i = 4000; i < n - 4000; ++i) CHECK(std::abs(r[i] - ramp[i]) <= 1e-6 * std::abs(ramp[i]));

  const Series slow = tone(n, 0.01, fs), fast = tone(n, 1.0, fs);
  const Series y = dwt_approx((slow + fast).eval(), fs);
  CHECK(y.size() == n);
  CHECK(tsupport::corr(y, slow) > 0.99);
  CHECK(rms(dwt_approx(fast, fs)) < 0.05 * rms(fast));
}

TEST_CASE("wavelet approximation is linear") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Series x = tsupport::white(5000, seed), y = tsupport::white(5000, seed + 50);
    const double a = 1.7, b = -0.4;
    const Series lhs = dwt_approx((a * x + b * y).eval(), 6);
    const Series rhs = a * dwt_approx(x, 6) + b * dwt_approx(y, 6);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
  }
  CHECK_THROWS_AS(dwt_approx(Series::Ones(100), 9), TooFewSamples);
}
