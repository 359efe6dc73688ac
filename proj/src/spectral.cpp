#include "thermosig/dsp.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace thermosig {

Spectrum welch_psd(const Eigen::Ref<const Series>& x, double fs, Eigen::Index seg_len, double overlap,
                   Eigen::Index nfft) {
  if (!(fs > 0.0)) throw InvalidArgument("welch: fs must be positive");
  if (seg_len < 2) throw InvalidArgument("welch: segment length must be >= 2");
  if (seg_len > x.size())
    throw TooFewSamples("welch_psd segment", static_cast<std::size_t>(seg_len), static_cast<std::size_t>(x.size()));
  if (!(overlap >= 0.0 && overlap < 1.0)) throw InvalidArgument("welch: overlap must be in [0, 1)");
  nfft = std::max(nfft, seg_len);

  const auto noverlap = static_cast<Eigen::Index>(std::floor(overlap * static_cast<double>(seg_len)));
  const Eigen::Index step = seg_len - noverlap;
  const Eigen::Index n_seg = (x.size() - seg_len) / step + 1;

  Series window(seg_len);
  for (Eigen::Index i = 0; i < seg_len; ++i)
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(seg_len));
  const double scale = 1.0 / (fs * window.squaredNorm());

  const Eigen::Index n_bins = nfft / 2 + 1;
  Series power = Series::Zero(n_bins);
  Eigen::FFT<double> fft;
  std::vector<double> buf(static_cast<std::size_t>(nfft));
  std::vector<std::complex<double>> spec;
  for (Eigen::Index s = 0; s < n_seg; ++s) {
    const auto seg = x.segment(s * step, seg_len);
    const double mean = seg.mean();
    std::fill(buf.begin(), buf.end(), 0.0);
    for (Eigen::Index i = 0; i < seg_len; ++i) buf[static_cast<std::size_t>(i)] = (seg[i] - mean) * window[i];
    fft.fwd(spec, buf);
    for (Eigen::Index k = 0; k < n_bins; ++k) power[k] += std::norm(spec[static_cast<std::size_t>(k)]);
  }
  power *= scale / static_cast<double>(n_seg);
  // one-sided: double everything except DC and (even nfft) Nyquist
  const Eigen::Index last = nfft % 2 == 0 ? n_bins - 1 : n_bins;
  power.segment(1, last - 1) *= 2.0;

  Spectrum out;
  out.resolution = fs / static_cast<double>(nfft);
  out.freqs = Series::LinSpaced(n_bins, 0.0, out.resolution * static_cast<double>(n_bins - 1));
  out.power = power;
  return out;
}

namespace {

std::pair<Eigen::Index, Eigen::Index> band_bins(const Spectrum& s, double low_hz, double high_hz) {
  if (!(high_hz > low_hz)) throw InvalidArgument("band requires low < high");
  Eigen::Index first = -1, last = -1;
  for (Eigen::Index k = 0; k < s.freqs.size(); ++k) {
    if (s.freqs[k] >= low_hz - 1e-12 && s.freqs[k] <= high_hz + 1e-12) {
      if (first < 0) first = k;
      last = k;
    }
  }
  if (first < 0 || last - first + 1 < 3) throw InvalidArgument("band contains fewer than 3 spectral bins");
  return {first, last};
}

}  // namespace

PeakEstimate parabolic_peak(const Spectrum& s, double low_hz, double high_hz) {
  const auto [first, last] = band_bins(s, low_hz, high_hz);
  Eigen::Index k = first;
  for (Eigen::Index i = first + 1; i <= last; ++i)
    if (s.power[i] > s.power[k]) k = i;

  PeakEstimate est;
  est.bin = k;
  est.power = s.power[k];
  est.freq_hz = s.freqs[k];
  if (k == first || k == last) return est;

  auto lg = [](double p) { return std::log(std::max(p, 1e-300)); };
  const double alpha = lg(s.power[k - 1]);
  const double beta = lg(s.power[k]);
  const double gamma = lg(s.power[k + 1]);
  const double denom = alpha - 2.0 * beta + gamma;
  if (std::abs(denom) < 1e-12) return est;
  const double delta = std::clamp(0.5 * (alpha - gamma) / denom, -0.5, 0.5);
  est.freq_hz = s.freqs[0] + (static_cast<double>(k) + delta) * s.resolution;
  est.refined = true;
  return est;
}

double peak_to_median_ratio(const Spectrum& s, double low_hz, double high_hz) {
  const auto [first, last] = band_bins(s, low_hz, high_hz);
  std::vector<double> band(s.power.data() + first, s.power.data() + last + 1);
  const double peak = *std::max_element(band.begin(), band.end());
  auto mid = band.begin() + static_cast<std::ptrdiff_t>(band.size() / 2);
  std::nth_element(band.begin(), mid, band.end());
  const double median = *mid;
  if (median <= 0.0) return peak > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return peak / median;
}

XcorrResult xcorr_normalized(const Eigen::Ref<const Series>& est, const Eigen::Ref<const Series>& ref,
                             int max_lag) {
  if (max_lag < 0) throw InvalidArgument("max_lag must be >= 0");
  if (est.size() != ref.size()) throw InvalidArgument("xcorr: length mismatch");
  const Eigen::Index n = est.size();
  if (n < 2 * static_cast<Eigen::Index>(max_lag) || n < 2)
    throw TooFewSamples("xcorr_normalized", static_cast<std::size_t>(std::max(2, 2 * max_lag)),
                        static_cast<std::size_t>(n));

  auto standardize = [](const Eigen::Ref<const Series>& v, const char* name) {
    const double mean = v.mean();
    const double sd = std::sqrt((v.array() - mean).square().mean());
    if (!(sd > 0.0) || !std::isfinite(sd)) throw InvalidArgument(std::string("xcorr: zero-variance ") + name);
    return Series((v.array() - mean) / sd);
  };
  const Series e = standardize(est, "estimate");
  const Series r = standardize(ref, "reference");

  XcorrResult out;
  out.max_lag = max_lag;
  out.r.resize(2 * max_lag + 1);
  for (int tau = -max_lag; tau <= max_lag; ++tau) {
    // pairs e[i] with r[i + tau]
    const Eigen::Index i0 = std::max<Eigen::Index>(0, -tau);
    const Eigen::Index len = n - std::abs(tau);
    const auto es = e.segment(i0, len);
    const auto rs = r.segment(i0 + tau, len);
    const double denom = std::sqrt(es.squaredNorm() * rs.squaredNorm());
    out.r[tau + max_lag] = denom > 0.0 ? es.dot(rs) / denom : 0.0;
  }
  // scan |tau| = 0, 1, 1, 2, 2, ... so ties resolve toward zero lag
  out.tau_star = 0;
  out.r_max = std::abs(out.r[max_lag]);
  for (int m = 1; m <= max_lag; ++m) {
    for (int tau : {-m, m}) {
      const double v = std::abs(out.r[tau + max_lag]);
      if (v > out.r_max) {
        out.r_max = v;
        out.tau_star = tau;
      }
    }
  }
  return out;
}

}  // namespace thermosig
