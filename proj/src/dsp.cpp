#include "thermosig/dsp.hpp"

#include <Eigen/QR>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>

namespace thermosig {
namespace {

// Least-squares weights that evaluate a degree-`order` fit at offset 0 from
// samples at the given integer offsets.
Series local_fit_weights(Eigen::Index first_offset, Eigen::Index len, int order) {
  const int deg = static_cast<int>(std::min<Eigen::Index>(order, len - 1));
  const double scale = std::max<double>(1.0, static_cast<double>(len) / 2.0);
  Eigen::MatrixXd v(len, deg + 1);
  for (Eigen::Index i = 0; i < len; ++i) {
    const double t = static_cast<double>(first_offset + i) / scale;
    double p = 1.0;
    for (int j = 0; j <= deg; ++j) {
      v(i, j) = p;
      p *= t;
    }
  }
  // row 0 of pinv(V): solve V^T-side via QR, e0^T (V^T V)^-1 V^T
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(deg + 1).triangularView<Eigen::Upper>();
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(deg + 1);
  e0[0] = 1.0;
  // c = Q * R^-T e0
  const Eigen::VectorXd y = r.transpose().triangularView<Eigen::Lower>().solve(e0);
  Eigen::VectorXd padded = Eigen::VectorXd::Zero(len);
  padded.head(deg + 1) = y;
  return qr.householderQ() * padded;
}

}  // namespace

Eigen::Index odd_window(double seconds, double fs) {
  auto n = static_cast<Eigen::Index>(std::llround(seconds * fs));
  if (n % 2 == 0) ++n;
  return std::max<Eigen::Index>(n, 1);
}

Series savgol_coefficients(Eigen::Index window, int poly_order) {
  if (window % 2 == 0) throw InvalidArgument("savgol window must be odd");
  if (window <= poly_order) throw InvalidArgument("savgol window must exceed the polynomial order");
  return local_fit_weights(-(window / 2), window, poly_order);
}

Series savgol(const Eigen::Ref<const Series>& x, Eigen::Index window, int poly_order) {
  if (poly_order < 0) throw InvalidArgument("savgol polynomial order must be >= 0");
  if (window % 2 == 0) ++window;
  if (window <= poly_order)
    throw InvalidArgument("savgol window (" + std::to_string(window) + ") must exceed polynomial order (" +
                          std::to_string(poly_order) + ")");
  const Eigen::Index n = x.size();
  const Eigen::Index half = window / 2;
  Series y(n);
  if (n == 0) return y;

  const Series c = savgol_coefficients(window, poly_order);
  for (Eigen::Index i = half; i + half < n; ++i) y[i] = c.dot(x.segment(i - half, window));

  for (Eigen::Index i = 0; i < n; ++i) {
    if (i >= half && i + half < n) continue;
    const Eigen::Index lo = std::max<Eigen::Index>(0, i - half);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + half);
    const Eigen::Index len = hi - lo + 1;
    y[i] = local_fit_weights(lo - i, len, poly_order).dot(x.segment(lo, len));
  }
  return y;
}

Series savgol(const Eigen::Ref<const Series>& x, double window_s, int poly_order, double fs) {
  return savgol(x, odd_window(window_s, fs), poly_order);
}

Series median_filter(const Eigen::Ref<const Series>& x, Eigen::Index kernel) {
  if (kernel < 1 || kernel % 2 == 0) throw InvalidArgument("median kernel must be odd and positive");
  const Eigen::Index n = x.size();
  const Eigen::Index half = kernel / 2;
  Series y(n);
  std::vector<double> buf;
  buf.reserve(static_cast<std::size_t>(kernel));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index h = std::min({half, i, n - 1 - i});
    buf.assign(x.data() + (i - h), x.data() + (i + h + 1));
    auto mid = buf.begin() + static_cast<std::ptrdiff_t>(h);
    std::nth_element(buf.begin(), mid, buf.end());
    y[i] = *mid;
  }
  return y;
}

Series moving_average(const Eigen::Ref<const Series>& x, Eigen::Index window) {
  if (window < 1) throw InvalidArgument("moving average window must be positive");
  const Eigen::Index n = x.size();
  Series y(n);
  if (n == 0) return y;
  const Eigen::Index half = window / 2;
  // prefix sums of deviations from x[0] keep magnitudes small
  const double base = x[0];
  std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
  for (Eigen::Index i = 0; i < n; ++i)
    prefix[static_cast<std::size_t>(i) + 1] = prefix[static_cast<std::size_t>(i)] + (x[i] - base);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, i - half);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + (window - 1 - half));
    const double sum = prefix[static_cast<std::size_t>(hi) + 1] - prefix[static_cast<std::size_t>(lo)];
    y[i] = base + sum / static_cast<double>(hi - lo + 1);
  }
  return y;
}

Series exponential_moving_average(const Eigen::Ref<const Series>& x, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("EMA alpha must be in (0, 1]");
  Series y(x.size());
  if (x.size() == 0) return y;
  y[0] = x[0];
  for (Eigen::Index i = 1; i < x.size(); ++i) y[i] = alpha * x[i] + (1.0 - alpha) * y[i - 1];
  return y;
}

Series hilbert_envelope(const Eigen::Ref<const Series>& x) {
  const Eigen::Index n = x.size();
  if (n < 64) throw TooFewSamples("hilbert_envelope", 64, static_cast<std::size_t>(n));
  Eigen::FFT<double> fft;
  std::vector<double> in(x.data(), x.data() + n);
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, in);
  const std::size_t un = static_cast<std::size_t>(n);
  // h = [1, 2, ..., 2, (1 at n/2 when even), 0, ...]
  const std::size_t half = un / 2;
  for (std::size_t k = 1; k < un; ++k) {
    if (k < (un + 1) / 2) spec[k] *= 2.0;
    else if (un % 2 == 0 && k == half) continue;
    else spec[k] = 0.0;
  }
  std::vector<std::complex<double>> analytic;
  fft.inv(analytic, spec);
  Series env(n);
  for (Eigen::Index i = 0; i < n; ++i) env[i] = std::abs(analytic[static_cast<std::size_t>(i)]);
  return env;
}

}  // namespace thermosig
