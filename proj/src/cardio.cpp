#include "thermosig/cardio.hpp"

#include "thermosig/resample.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace thermosig {

RateEstimatorConfig RateEstimatorConfig::cardiac() { return {}; }

RateEstimatorConfig RateEstimatorConfig::respiratory() {
  RateEstimatorConfig c;
  c.band_low_hz = 0.12;
  c.band_high_hz = 0.55;
  c.window_s = 25.0;
  c.valid_low_bpm = 7.0;
  c.valid_high_bpm = 45.0;
  c.apply_median = false;
  c.min_peak_ratio = 6.0;
  return c;
}

void RateEstimatorConfig::validate(double fs) const {
  if (!(band_low_hz > 0.0 && band_high_hz > band_low_hz && band_high_hz < fs / 2.0))
    throw InvalidArgument("rate band must lie within (0, fs/2)");
  if (!(window_s > 2.0 / band_low_hz)) throw InvalidArgument("rate window must exceed two periods of the band's low edge");
  if (!(step_s > 0.0)) throw InvalidArgument("rate step must be positive");
  if (!(valid_high_bpm > valid_low_bpm)) throw InvalidArgument("valid bpm range is empty");
  if (gap_max < 0 || median_len < 1 || median_len % 2 == 0)
    throw InvalidArgument("gap_max must be >= 0 and median_len odd");
}

WelchLayout WelchLayout::for_window(Eigen::Index window_samples) {
  WelchLayout w;
  w.seg_len = std::max<Eigen::Index>(2, window_samples / 2);
  Eigen::Index p = 1;
  while (p < w.seg_len) p <<= 1;
  w.nfft = 4 * p;
  return w;
}

namespace {

Series standardized(const Series& x) {
  const double mean = x.mean();
  const double sd = std::sqrt((x.array() - mean).square().mean());
  if (!(sd > 0.0)) return Series::Zero(x.size());
  return (x.array() - mean) / sd;
}

double band_quality(const Series& x, double fs, double lo, double hi, double segment_s) {
  const Eigen::Index seg = std::min<Eigen::Index>(x.size(), static_cast<Eigen::Index>(std::llround(segment_s * fs)));
  Eigen::Index p = 1;
  while (p < seg) p <<= 1;
  return peak_to_median_ratio(welch_psd(x, fs, seg, 0.5, 4 * p), lo, hi);
}

}  // namespace

OmitResult omit_fuse(const std::vector<Series>& channels, double fs, double band_low_hz, double band_high_hz,
                     double segment_s) {
  const auto c = static_cast<Eigen::Index>(channels.size());
  if (c < 2) throw InvalidArgument("omit_fuse needs at least 2 channels, got " + std::to_string(c));
  const Eigen::Index n = channels.front().size();
  for (const auto& ch : channels)
    if (ch.size() != n) throw InvalidArgument("omit_fuse: channels differ in length");
  if (n < 4) throw TooFewSamples("omit_fuse", 4, static_cast<std::size_t>(n));

  std::vector<double> variance(channels.size());
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const double m = channels[i].mean();
    variance[i] = (channels[i].array() - m).square().mean();
  }
  std::vector<int> order(channels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return variance[a] > variance[b]; });

  // samples x channels, columns in variance order
  Eigen::MatrixXd m(n, c);
  for (Eigen::Index j = 0; j < c; ++j) m.col(j) = standardized(channels[static_cast<std::size_t>(order[j])]);

  OmitResult out;
  out.dominant = order.front();
  out.peak_ratios.assign(channels.size(), 0.0);

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  const Eigen::MatrixXd& packed = qr.matrixQR();
  const double r00 = std::abs(packed(0, 0));
  bool full_rank_beyond_first = false;
  for (Eigen::Index j = 1; j < c; ++j)
    if (std::abs(packed(j, j)) > 1e-8 * r00) full_rank_beyond_first = true;

  if (r00 > 0.0 && full_rank_beyond_first) {
    Eigen::VectorXd e0 = Eigen::VectorXd::Zero(n);
    e0[0] = 1.0;
    const Eigen::VectorXd q = qr.householderQ() * e0;
    const double scale = std::sqrt(static_cast<double>(n));  // norm of a standardised row
    double best = -1.0;
    for (Eigen::Index j = 1; j < c; ++j) {
      const Series resid = m.col(j) - q.dot(m.col(j)) * q;
      if (resid.norm() <= 1e-6 * scale) continue;
      const int ch = order[static_cast<std::size_t>(j)];
      const double ratio = band_quality(resid, fs, band_low_hz, band_high_hz, segment_s);
      out.peak_ratios[static_cast<std::size_t>(ch)] = ratio;
      if (ratio > best) {
        best = ratio;
        out.selected = ch;
        out.signal = resid;
      }
    }
  }
  if (out.selected < 0) {
    out.fallback = true;
    double best = -1.0;
    for (std::size_t i = 0; i < channels.size(); ++i) {
      const Series z = standardized(channels[i]);
      const double ratio = z.isZero() ? 0.0 : band_quality(z, fs, band_low_hz, band_high_hz, segment_s);
      out.peak_ratios[i] = ratio;
      if (ratio > best) {
        best = ratio;
        out.selected = static_cast<int>(i);
        out.signal = z;
      }
    }
  }
  return out;
}

BiosignalEstimate estimate_rate_track(const Eigen::Ref<const Series>& x, const Mask& valid, double fs,
                                      const RateEstimatorConfig& cfg, BiosignalKind kind) {
  cfg.validate(fs);
  if (valid.size() != x.size()) throw InvalidArgument("rate track: mask length mismatch");
  const auto window = static_cast<Eigen::Index>(std::llround(cfg.window_s * fs));
  const auto step = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(cfg.step_s * fs)));
  if (x.size() < window)
    throw TooFewSamples("estimate_rate_track window", static_cast<std::size_t>(window), static_cast<std::size_t>(x.size()));

  const WelchLayout layout = WelchLayout::for_window(window);
  const Eigen::Index count = (x.size() - window) / step + 1;

  BiosignalEstimate out;
  out.kind = kind;
  out.rate_hz = fs / static_cast<double>(step);
  out.t0 = static_cast<double>(window) / (2.0 * fs);
  out.values = Series::Zero(count);
  out.valid = Mask::Constant(count, false);
  for (Eigen::Index k = 0; k < count; ++k) {
    const Eigen::Index start = k * step;
    const double frac = static_cast<double>(valid.segment(start, window).count()) / static_cast<double>(window);
    if (frac < cfg.min_valid_fraction) continue;
    const Spectrum spec = welch_psd(x.segment(start, window), fs, layout.seg_len, 0.5, layout.nfft);
    const PeakEstimate peak = parabolic_peak(spec, cfg.band_low_hz, cfg.band_high_hz);
    out.values[k] = 60.0 * peak.freq_hz;
    out.valid[k] = peak.refined && peak_to_median_ratio(spec, cfg.band_low_hz, cfg.band_high_hz) >= cfg.min_peak_ratio;
  }
  return out;
}

BiosignalEstimate postprocess_rates(const BiosignalEstimate& raw, const RateEstimatorConfig& cfg) {
  BiosignalEstimate out = raw;
  const Eigen::Index n = out.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = out.values[i];
    if (!std::isfinite(v) || v < cfg.valid_low_bpm || v > cfg.valid_high_bpm) out.valid[i] = false;
  }
  if (out.valid.count() == 0) return out;
  bridge_gaps(out.values, out.valid, cfg.gap_max);

  if (cfg.apply_median && cfg.median_len > 1) {
    Eigen::Index i = 0;
    while (i < n) {
      if (!out.valid[i]) {
        ++i;
        continue;
      }
      Eigen::Index j = i;
      while (j < n && out.valid[j]) ++j;
      out.values.segment(i, j - i) = median_filter(out.values.segment(i, j - i), cfg.median_len);
      i = j;
    }
  }
  return out;
}

namespace {

const RoiTrace* find_trace(const std::vector<RoiTrace>& traces, RoiKind kind) {
  for (const auto& t : traces)
    if (t.roi == kind) return &t;
  return nullptr;
}

struct PreparedChannels {
  std::vector<Series> values;
  Mask valid;
  double fs = 0.0;
};

PreparedChannels prepare(const std::vector<const RoiTrace*>& used, double max_bridge_s, double min_valid_s,
                         const char* what) {
  PreparedChannels p;
  p.fs = used.front()->fps;
  const Eigen::Index n = used.front()->size();
  p.valid = Mask::Constant(n, true);
  for (const RoiTrace* t : used) {
    t->validate();
    if (t->size() != n || std::abs(t->fps - p.fs) > 1e-9)
      throw InvalidArgument(std::string(what) + ": traces differ in length or rate");
    if (t->valid.count() == 0) throw InvalidArgument(std::string(what) + ": " + std::string(to_string(t->roi)) + " trace has no valid samples");
    Series v = t->values;
    Mask m = t->valid;
    for (Eigen::Index i = 0; i < n; ++i)
      if (m[i] && !std::isfinite(v[i])) throw NonFiniteValue(static_cast<std::size_t>(i));
    bridge_gaps(v, m, static_cast<Eigen::Index>(std::floor(max_bridge_s * p.fs + 1e-9)));
    p.valid = p.valid && m;
    p.values.push_back(std::move(v));
  }
  const auto required = static_cast<std::size_t>(std::ceil(min_valid_s * p.fs - 1e-9));
  if (static_cast<std::size_t>(p.valid.count()) < required)
    throw TooFewSamples(what, required, static_cast<std::size_t>(p.valid.count()));
  return p;
}

}  // namespace

HrResult estimate_hr(const std::vector<RoiTrace>& traces, const HrConfig& cfg) {
  HrResult result;
  std::vector<const RoiTrace*> used;
  for (RoiKind k : {RoiKind::Forehead, RoiKind::Nose, RoiKind::CheekL, RoiKind::CheekR}) {
    if (const RoiTrace* t = find_trace(traces, k)) {
      used.push_back(t);
      result.channels.push_back(k);
    }
  }
  if (used.size() < 2)
    throw InvalidArgument("heart rate needs at least 2 of forehead/nose/cheek_l/cheek_r, got " +
                          std::to_string(used.size()));
  result.degraded = used.size() < 4;

  PreparedChannels p = prepare(used, cfg.max_bridge_s, cfg.min_valid_s, "estimate_hr");
  const auto pre = design_iir(FilterDesign::bandpass(FilterFamily::Butterworth, cfg.prefilter_order,
                                                     cfg.prefilter_low_hz, cfg.prefilter_high_hz, p.fs));
  for (auto& ch : p.values) ch = filtfilt(pre, ch);

  result.omit = omit_fuse(p.values, p.fs, cfg.rate.band_low_hz, cfg.rate.band_high_hz, cfg.rate.window_s / 2.0);
  const auto band = design_iir(FilterDesign::bandpass(FilterFamily::Butterworth, cfg.band_order,
                                                      cfg.rate.band_low_hz, cfg.rate.band_high_hz, p.fs));
  const Series pulse = filtfilt(band, result.omit.signal);
  const auto raw = estimate_rate_track(pulse, p.valid, p.fs, cfg.rate, BiosignalKind::HeartRate);
  result.estimate = postprocess_rates(raw, cfg.rate);
  result.estimate.provenance = "omit(selected=" +
                               std::string(to_string(result.channels[static_cast<std::size_t>(result.omit.selected)])) +
                               (result.omit.fallback ? ",fallback" : "") + ")";
  return result;
}

BiosignalEstimate estimate_br(const std::vector<RoiTrace>& traces, const BrConfig& cfg) {
  std::vector<const RoiTrace*> used;
  const RoiTrace* nose = find_trace(traces, RoiKind::Nose);
  if (nose == nullptr) throw InvalidArgument("breathing rate needs a nose trace");
  used.push_back(nose);
  for (RoiKind k : {RoiKind::CheekL, RoiKind::CheekR})
    if (const RoiTrace* t = find_trace(traces, k)) used.push_back(t);

  PreparedChannels p = prepare(used, cfg.max_bridge_s, cfg.min_valid_s, "estimate_br");
  const auto pre = design_iir(FilterDesign::bandpass(FilterFamily::Butterworth, cfg.prefilter_order,
                                                     cfg.prefilter_low_hz, cfg.prefilter_high_hz, p.fs));
  Series combined = Series::Zero(p.valid.size());
  for (const auto& ch : p.values) combined += filtfilt(pre, ch);
  combined /= static_cast<double>(p.values.size());

  const auto raw = estimate_rate_track(combined, p.valid, p.fs, cfg.rate, BiosignalKind::BreathingRate);
  auto est = postprocess_rates(raw, cfg.rate);
  est.provenance = "nose+cheeks(n=" + std::to_string(used.size()) + ")";
  return est;
}

}  // namespace thermosig
