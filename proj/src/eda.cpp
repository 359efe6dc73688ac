#include "thermosig/eda.hpp"

#include "thermosig/dsp.hpp"
#include "thermosig/resample.hpp"

#include <cmath>
#include <sstream>

namespace thermosig {

std::string_view to_string(EdaMethod m) noexcept {
  switch (m) {
    case EdaMethod::ButterworthLp: return "butterworth";
    case EdaMethod::BesselLp: return "bessel";
    case EdaMethod::SavGol: return "savgol";
    case EdaMethod::MovingAvg: return "moving_avg";
    case EdaMethod::ExpMovingAvg: return "ema";
    case EdaMethod::MedianSavGol: return "median_savgol";
    case EdaMethod::HilbertEnv: return "hilbert";
    case EdaMethod::WaveletApprox: return "wavelet";
  }
  return "?";
}

EdaMethod parse_eda_method(std::string_view name) {
  for (const auto& p : enumerate_methods())
    if (to_string(p.method) == name) return p.method;
  throw InvalidArgument("unknown EDA method '" + std::string(name) + "'");
}

std::string EdaParams::describe() const {
  std::ostringstream os;
  os << to_string(method) << '(';
  switch (method) {
    case EdaMethod::ButterworthLp:
    case EdaMethod::BesselLp: os << "fc=" << cutoff_hz << ",order=" << filter_order; break;
    case EdaMethod::SavGol: os << "window_s=" << window_s << ",poly=" << poly_order; break;
    case EdaMethod::MovingAvg:
    case EdaMethod::ExpMovingAvg: os << "window_s=" << window_s; break;
    case EdaMethod::MedianSavGol:
      os << "median_s=" << median_s << ",window_s=" << window_s << ",poly=" << poly_order;
      break;
    case EdaMethod::HilbertEnv:
      os << "band=" << envelope_band_low_hz << '-' << envelope_band_high_hz << ",band_order=" << envelope_band_order
         << ",fc=" << cutoff_hz << ",order=" << filter_order;
      break;
    case EdaMethod::WaveletApprox: os << "db4,band=" << wavelet_band_hz; break;
  }
  os << ')';
  return os.str();
}

EdaParams default_params(EdaMethod method) {
  EdaParams p;
  p.method = method;
  return p;
}

std::vector<EdaParams> enumerate_methods() {
  return {default_params(EdaMethod::ButterworthLp), default_params(EdaMethod::BesselLp),
          default_params(EdaMethod::SavGol),        default_params(EdaMethod::MovingAvg),
          default_params(EdaMethod::ExpMovingAvg),  default_params(EdaMethod::MedianSavGol),
          default_params(EdaMethod::HilbertEnv),    default_params(EdaMethod::WaveletApprox)};
}

Series smooth_eda(const Eigen::Ref<const Series>& x, double fs, const EdaParams& p) {
  switch (p.method) {
    case EdaMethod::ButterworthLp:
    case EdaMethod::BesselLp: {
      const auto family = p.method == EdaMethod::ButterworthLp ? FilterFamily::Butterworth : FilterFamily::Bessel;
      return filtfilt(design_iir(FilterDesign::lowpass(family, p.filter_order, p.cutoff_hz, fs)), x);
    }
    case EdaMethod::SavGol: return savgol(x, p.window_s, p.poly_order, fs);
    case EdaMethod::MovingAvg: return moving_average(x, odd_window(p.window_s, fs));
    case EdaMethod::ExpMovingAvg: {
      const double span = std::round(p.window_s * fs);
      return exponential_moving_average(x, 2.0 / (span + 1.0));
    }
    case EdaMethod::MedianSavGol:
      return savgol(median_filter(x, odd_window(p.median_s, fs)), p.window_s, p.poly_order, fs);
    case EdaMethod::HilbertEnv: {
      const auto band = design_iir(FilterDesign::bandpass(FilterFamily::Butterworth, p.envelope_band_order,
                                                          p.envelope_band_low_hz, p.envelope_band_high_hz, fs));
      const auto lowpass =
          design_iir(FilterDesign::lowpass(FilterFamily::Butterworth, p.filter_order, p.cutoff_hz, fs));
      const Series in_band = filtfilt(band, x);
      const Series envelope = hilbert_envelope(in_band);
      return filtfilt(lowpass, Series(x - in_band + envelope));
    }
    case EdaMethod::WaveletApprox: return dwt_approx(x, fs, p.wavelet_band_hz);
  }
  return x;
}

BiosignalEstimate extract_eda_trend(const RoiTrace& trace, const EdaParams& params, double min_valid_s,
                                    double max_bridge_s) {
  trace.validate();
  const double fs = trace.fps;
  const double factor_d = std::round(fs);
  if (std::abs(fs - factor_d) > 1e-9 || factor_d < 1.0)
    throw InvalidArgument("EDA extraction needs an integer sampling rate, got " + std::to_string(fs));
  const auto factor = static_cast<Eigen::Index>(factor_d);

  const Eigen::Index n_valid = trace.valid.count();
  if (n_valid == 0) throw InvalidArgument("EDA extraction: trace has no valid samples");
  const auto required = static_cast<std::size_t>(std::ceil(min_valid_s * fs - 1e-9));
  if (static_cast<std::size_t>(n_valid) < required)
    throw TooFewSamples("extract_eda_trend", required, static_cast<std::size_t>(n_valid));

  Series values = trace.values;
  Mask valid = trace.valid;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (valid[i] && !std::isfinite(values[i])) throw NonFiniteValue(static_cast<std::size_t>(i));
  bridge_gaps(values, valid, static_cast<Eigen::Index>(std::floor(max_bridge_s * fs + 1e-9)));

  const Series smooth = smooth_eda(values, fs, params);

  BiosignalEstimate out;
  out.kind = BiosignalKind::EdaTrend;
  out.rate_hz = 1.0;
  out.t0 = 0.0;
  const Eigen::Index n_out = (smooth.size() + factor - 1) / factor;
  out.values.resize(n_out);
  out.valid.resize(n_out);
  for (Eigen::Index k = 0; k < n_out; ++k) {
    out.values[k] = smooth[k * factor];
    out.valid[k] = valid[k * factor];
  }
  out.provenance = std::string(to_string(trace.roi)) + "/" + params.describe();
  return out;
}

}  // namespace thermosig
