#include "thermosig/dsp.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace thermosig {
namespace {

using cplx = std::complex<double>;
using ZpkList = std::vector<cplx>;

ZpkList butterworth_prototype(int n) {
  ZpkList p;
  for (int k = 0; k < n; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + n + 1) / (2.0 * n);
    p.push_back(std::polar(1.0, theta));
  }
  return p;
}

// Roots of the reverse Bessel polynomial, rescaled so |H(j1)| = 1/sqrt(2).
ZpkList bessel_prototype(int n) {
  // theta_n(s) = sum_k (2n-k)! / (2^(n-k) k! (n-k)!) s^k
  std::vector<double> coef(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    double c = 1.0;
    for (int i = n - k + 1; i <= 2 * n - k; ++i) c *= i;  // (2n-k)!/(n-k)!
    for (int i = 2; i <= k; ++i) c /= i;
    c /= std::pow(2.0, n - k);
    coef[static_cast<std::size_t>(k)] = c;
  }
  ZpkList p;
  if (n == 1) {
    p.push_back(-coef[0] / coef[1]);
  } else {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -coef[static_cast<std::size_t>(i)] / coef[static_cast<std::size_t>(n)];
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    for (int i = 0; i < n; ++i) p.push_back(es.eigenvalues()[i]);
  }
  auto mag2 = [&](double w) {
    cplx h = 1.0;
    for (const auto& pk : p) h *= (-pk) / (cplx(0.0, w) - pk);
    return std::norm(h);
  };
  double lo = 1e-3, hi = 1e3;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    (mag2(mid) > 0.5 ? lo : hi) = mid;
  }
  const double wc = std::sqrt(lo * hi);
  for (auto& pk : p) pk /= wc;
  return p;
}

Eigen::VectorXd poly_from_roots(const ZpkList& roots) {
  std::vector<cplx> c{1.0};
  for (const auto& r : roots) {
    std::vector<cplx> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i] += c[i];
      next[i + 1] -= r * c[i];
    }
    c = std::move(next);
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i) out[static_cast<Eigen::Index>(i)] = c[i].real();
  return out;
}

// Groups roots into real quadratic (or linear) factors [1, c1, c2].
std::vector<std::array<double, 3>> quadratic_factors(ZpkList roots) {
  std::vector<std::array<double, 3>> out;
  std::vector<double> reals;
  std::vector<cplx> upper;
  for (const auto& r : roots) {
    if (std::abs(r.imag()) <= 1e-10 * std::max(1.0, std::abs(r))) reals.push_back(r.real());
    else if (r.imag() > 0) upper.push_back(r);
  }
  std::sort(upper.begin(), upper.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
  for (const auto& r : upper) out.push_back({1.0, -2.0 * r.real(), std::norm(r)});
  std::sort(reals.begin(), reals.end());
  // pair smallest with largest so +1/-1 zeros land in the same section
  std::size_t i = 0, j = reals.size();
  while (j - i >= 2) {
    const double r1 = reals[i++], r2 = reals[--j];
    out.push_back({1.0, -(r1 + r2), r1 * r2});
  }
  if (i < j) out.push_back({1.0, -reals[i], 0.0});
  return out;
}

}  // namespace

double IirFilter::max_pole_modulus() const {
  double m = 0.0;
  for (const auto& p : poles) m = std::max(m, std::abs(p));
  return m;
}

std::complex<double> IirFilter::response(double freq_hz) const {
  const double w = 2.0 * std::numbers::pi * freq_hz / design.fs;
  const cplx z1 = std::polar(1.0, -w);
  const cplx z2 = z1 * z1;
  cplx h = 1.0;
  for (const auto& s : sections)
    h *= (s.b[0] + s.b[1] * z1 + s.b[2] * z2) / (s.a[0] + s.a[1] * z1 + s.a[2] * z2);
  return h;
}

Eigen::Index IirFilter::pad_length() const { return 3 * (std::max(a.size(), b.size()) - 1); }

IirFilter design_iir(const FilterDesign& d) {
  if (d.order < 1) throw InvalidArgument("filter order must be >= 1");
  if (!(d.fs > 0.0)) throw InvalidArgument("sampling rate must be positive");
  const double nyquist = d.fs / 2.0;
  if (!(d.low_hz > 0.0 && d.low_hz < nyquist))
    throw InvalidArgument("cutoff " + std::to_string(d.low_hz) + " Hz outside (0, Nyquist=" +
                          std::to_string(nyquist) + ")");
  if (d.kind == FilterKind::Bandpass) {
    if (!(d.high_hz > d.low_hz)) throw InvalidArgument("bandpass requires low < high");
    if (!(d.high_hz < nyquist))
      throw InvalidArgument("cutoff " + std::to_string(d.high_hz) + " Hz outside (0, Nyquist=" +
                            std::to_string(nyquist) + ")");
  }

  ZpkList proto = d.family == FilterFamily::Butterworth ? butterworth_prototype(d.order) : bessel_prototype(d.order);
  cplx k_proto = 1.0;
  for (const auto& p : proto) k_proto *= -p;  // unity DC gain

  const double fs2 = 2.0 * d.fs;
  auto warp = [&](double f) { return fs2 * std::tan(std::numbers::pi * f / d.fs); };

  ZpkList za, pa;
  cplx ka = k_proto;
  if (d.kind == FilterKind::Lowpass) {
    const double wo = warp(d.low_hz);
    for (const auto& p : proto) pa.push_back(p * wo);
    ka *= std::pow(wo, d.order);
  } else {
    const double w1 = warp(d.low_hz), w2 = warp(d.high_hz);
    const double bw = w2 - w1;
    const double wo = std::sqrt(w1 * w2);
    for (const auto& p : proto) {
      const cplx half = p * bw / 2.0;
      const cplx root = std::sqrt(half * half - wo * wo);
      pa.push_back(half + root);
      pa.push_back(half - root);
    }
    za.assign(static_cast<std::size_t>(d.order), cplx(0.0));
    ka *= std::pow(bw, d.order);
  }

  IirFilter f;
  f.design = d;
  cplx num = 1.0, den = 1.0;
  for (const auto& z : za) {
    f.zeros.push_back((fs2 + z) / (fs2 - z));
    num *= fs2 - z;
  }
  for (const auto& p : pa) {
    f.poles.push_back((fs2 + p) / (fs2 - p));
    den *= fs2 - p;
  }
  while (f.zeros.size() < f.poles.size()) f.zeros.emplace_back(-1.0, 0.0);
  f.gain = (ka * num / den).real();

  if (!(f.max_pole_modulus() < 1.0 - 1e-9))
    throw InvalidArgument("designed filter is unstable (max pole modulus " +
                          std::to_string(f.max_pole_modulus()) + ")");

  f.b = f.gain * poly_from_roots(f.zeros);
  f.a = poly_from_roots(f.poles);

  const auto pole_factors = quadratic_factors(f.poles);
  const auto zero_factors = quadratic_factors(f.zeros);
  if (pole_factors.size() != zero_factors.size()) throw std::logic_error("section pairing mismatch");
  for (std::size_t s = 0; s < pole_factors.size(); ++s) {
    Biquad q;
    q.a = pole_factors[s];
    q.b = zero_factors[s];
    f.sections.push_back(q);
  }
  for (auto& c : f.sections.front().b) c *= f.gain;
  return f;
}

namespace {

// Steady-state section states for a unit step, scaled through the cascade.
std::vector<std::array<double, 2>> step_states(const std::vector<Biquad>& sections) {
  std::vector<std::array<double, 2>> zi(sections.size());
  double scale = 1.0;
  for (std::size_t s = 0; s < sections.size(); ++s) {
    const auto& q = sections[s];
    const double g = (q.b[0] + q.b[1] + q.b[2]) / (q.a[0] + q.a[1] + q.a[2]);
    const double z1 = q.b[2] - q.a[2] * g;
    const double z0 = q.b[1] - q.a[1] * g + z1;
    zi[s] = {scale * z0, scale * z1};
    scale *= g;
  }
  return zi;
}

void run_sections(const std::vector<Biquad>& sections, std::vector<std::array<double, 2>> state,
                  std::vector<double>& x) {
  for (std::size_t s = 0; s < sections.size(); ++s) {
    const auto& q = sections[s];
    double z0 = state[s][0], z1 = state[s][1];
    for (double& v : x) {
      const double in = v;
      const double y = q.b[0] * in + z0;
      z0 = q.b[1] * in - q.a[1] * y + z1;
      z1 = q.b[2] * in - q.a[2] * y;
      v = y;
    }
  }
}

}  // namespace

Series sosfilt(const IirFilter& filter, const Eigen::Ref<const Series>& x) {
  std::vector<double> buf(x.data(), x.data() + x.size());
  run_sections(filter.sections, std::vector<std::array<double, 2>>(filter.sections.size(), {0.0, 0.0}), buf);
  return Eigen::Map<Series>(buf.data(), x.size());
}

Series filtfilt(const IirFilter& filter, const Eigen::Ref<const Series>& x) {
  const Eigen::Index n = x.size();
  const Eigen::Index pad = filter.pad_length();
  if (n <= pad) throw TooFewSamples("filtfilt", static_cast<std::size_t>(pad + 1), static_cast<std::size_t>(n));

  std::vector<double> ext(static_cast<std::size_t>(n + 2 * pad));
  for (Eigen::Index i = 0; i < pad; ++i) ext[static_cast<std::size_t>(i)] = 2.0 * x[0] - x[pad - i];
  for (Eigen::Index i = 0; i < n; ++i) ext[static_cast<std::size_t>(pad + i)] = x[i];
  for (Eigen::Index i = 0; i < pad; ++i)
    ext[static_cast<std::size_t>(pad + n + i)] = 2.0 * x[n - 1] - x[n - 2 - i];

  const auto zi = step_states(filter.sections);
  auto scaled = [&](double v) {
    auto z = zi;
    for (auto& s : z) s = {s[0] * v, s[1] * v};
    return z;
  };
  auto forward_backward = [&](std::vector<double> v) {
    run_sections(filter.sections, scaled(v.front()), v);
    std::reverse(v.begin(), v.end());
    run_sections(filter.sections, scaled(v.front()), v);
    std::reverse(v.begin(), v.end());
    return v;
  };
  // The two pass orders differ only in their edge transients; averaging them
  // makes the result commute exactly with time reversal.
  const std::vector<double> fb = forward_backward(ext);
  std::vector<double> bf(ext.rbegin(), ext.rend());
  bf = forward_backward(std::move(bf));
  std::reverse(bf.begin(), bf.end());

  Series out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(pad + i);
    out[i] = 0.5 * (fb[k] + bf[k]);
  }
  return out;
}

}  // namespace thermosig
