#include "thermosig/resample.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace thermosig {
namespace {

// Second derivatives of the natural cubic spline through (x, y).
std::vector<double> natural_spline_moments(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> m(n, 0.0);
  if (n < 3) return m;
  // Thomas algorithm on the (n-2) interior equations.
  const std::size_t k = n - 2;
  std::vector<double> diag(k), upper(k), rhs(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double h0 = x[i + 1] - x[i];
    const double h1 = x[i + 2] - x[i + 1];
    diag[i] = 2.0 * (h0 + h1);
    upper[i] = h1;
    rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
  }
  for (std::size_t i = 1; i < k; ++i) {
    const double lower = x[i + 1] - x[i];
    const double w = lower / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  m[k] = rhs[k - 1] / diag[k - 1];
  for (std::size_t i = k - 1; i-- > 0;) m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
  return m;
}

}  // namespace

SampledSeries resample_to_timeline(const SampledSeries& series, double target_rate,
                                   InterpMethod method, double max_gap_s) {
  if (!(target_rate > 0.0)) throw InvalidArgument("target_rate must be positive");
  if (!(series.rate > 0.0)) throw InvalidArgument("series rate must be positive");
  if (series.values.size() != series.valid.size())
    throw InvalidArgument("values/valid length mismatch");

  std::vector<double> kx, ky;
  kx.reserve(static_cast<std::size_t>(series.size()));
  ky.reserve(static_cast<std::size_t>(series.size()));
  for (Eigen::Index i = 0; i < series.size(); ++i) {
    if (!series.valid[i]) continue;
    if (!std::isfinite(series.values[i])) throw NonFiniteValue(static_cast<std::size_t>(i));
    kx.push_back(series.time_at(i));
    ky.push_back(series.values[i]);
  }
  const std::size_t min_knots = method == InterpMethod::CubicSpline ? 4 : method == InterpMethod::Linear ? 2 : 1;
  if (kx.size() < min_knots) throw TooFewSamples("resample_to_timeline", min_knots, kx.size());

  const double ratio = target_rate / series.rate;
  const Eigen::Index n_out =
      series.size() == 0 ? 0
                         : static_cast<Eigen::Index>(std::floor(static_cast<double>(series.size() - 1) * ratio + 1e-9)) + 1;

  std::vector<double> moments;
  if (method == InterpMethod::CubicSpline) moments = natural_spline_moments(kx, ky);

  SampledSeries out;
  out.rate = target_rate;
  out.t0 = series.t0;
  out.values.resize(n_out);
  out.valid.resize(n_out);

  const double tol = 1e-9 / std::min(series.rate, target_rate);
  std::size_t j = 0;  // kx[j] <= t < kx[j+1]
  for (Eigen::Index k = 0; k < n_out; ++k) {
    const double t = out.time_at(k);
    if (t < kx.front() - tol) {
      out.values[k] = ky.front();
      out.valid[k] = false;
      continue;
    }
    if (t > kx.back() + tol) {
      out.values[k] = ky.back();
      out.valid[k] = false;
      continue;
    }
    while (j + 1 < kx.size() && kx[j + 1] <= t + tol) ++j;
    if (j + 1 == kx.size() || std::abs(t - kx[j]) <= tol) {
      out.values[k] = ky[j];
      out.valid[k] = true;
      continue;
    }
    const double x0 = kx[j], x1 = kx[j + 1];
    const double h = x1 - x0;
    double v = 0.0;
    switch (method) {
      case InterpMethod::Hold: v = ky[j]; break;
      case InterpMethod::Linear: v = ky[j] + (ky[j + 1] - ky[j]) * (t - x0) / h; break;
      case InterpMethod::CubicSpline: {
        const double a = (x1 - t) / h;
        const double b = (t - x0) / h;
        v = a * ky[j] + b * ky[j + 1] +
            ((a * a * a - a) * moments[j] + (b * b * b - b) * moments[j + 1]) * h * h / 6.0;
        break;
      }
    }
    out.values[k] = v;
    out.valid[k] = h <= max_gap_s + tol;
  }
  return out;
}

Series interp_linear(std::span<const double> t, const Eigen::Ref<const Series>& y,
                     std::span<const double> query, Mask* inside) {
  if (t.size() != static_cast<std::size_t>(y.size())) throw InvalidArgument("interp_linear: length mismatch");
  if (t.empty()) throw TooFewSamples("interp_linear", 1, 0);
  Series out(static_cast<Eigen::Index>(query.size()));
  if (inside) inside->resize(out.size());
  std::size_t j = 0;
  for (std::size_t k = 0; k < query.size(); ++k) {
    const double q = query[k];
    const auto kk = static_cast<Eigen::Index>(k);
    if (q <= t.front() || t.size() == 1) {
      out[kk] = y[0];
      if (inside) (*inside)[kk] = q >= t.front();
      continue;
    }
    if (q >= t.back()) {
      out[kk] = y[y.size() - 1];
      if (inside) (*inside)[kk] = q <= t.back();
      continue;
    }
    if (q < t[j]) j = 0;  // queries need not be sorted
    while (j + 1 < t.size() && t[j + 1] <= q) ++j;
    const auto jj = static_cast<Eigen::Index>(j);
    const double w = (q - t[j]) / (t[j + 1] - t[j]);
    out[kk] = y[jj] + w * (y[jj + 1] - y[jj]);
    if (inside) (*inside)[kk] = true;
  }
  return out;
}

void bridge_gaps(Series& values, Mask& valid, Eigen::Index max_gap) {
  const Eigen::Index n = values.size();
  Eigen::Index first = -1, last = -1;
  for (Eigen::Index i = 0; i < n; ++i)
    if (valid[i]) {
      if (first < 0) first = i;
      last = i;
    }
  if (first < 0) throw InvalidArgument("bridge_gaps: no valid samples");
  for (Eigen::Index i = 0; i < first; ++i) values[i] = values[first];
  for (Eigen::Index i = last + 1; i < n; ++i) values[i] = values[last];

  Eigen::Index i = first;
  while (i < last) {
    if (valid[i + 1]) {
      ++i;
      continue;
    }
    Eigen::Index j = i + 1;
    while (!valid[j]) ++j;
    const Eigen::Index run = j - i - 1;
    const bool fill_valid = run <= max_gap;
    for (Eigen::Index k = i + 1; k < j; ++k) {
      const double w = static_cast<double>(k - i) / static_cast<double>(j - i);
      values[k] = values[i] + w * (values[j] - values[i]);
      valid[k] = fill_valid;
    }
    i = j;
  }
}

}  // namespace thermosig
