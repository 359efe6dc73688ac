#pragma once

#include "thermosig/core.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace thermosig {

enum class EdaMethod {
  ButterworthLp,
  BesselLp,
  SavGol,
  MovingAvg,
  ExpMovingAvg,
  MedianSavGol,
  HilbertEnv,
  WaveletApprox,
};

std::string_view to_string(EdaMethod m) noexcept;
EdaMethod parse_eda_method(std::string_view name);

/// Fixed parameter set of one trend extractor.
struct EdaParams {
  EdaMethod method = EdaMethod::ButterworthLp;
  double cutoff_hz = 0.05;  // IIR lowpasses and the envelope's final lowpass
  int filter_order = 3;
  double window_s = 30.0;  // SavGol, SMA, EMA span
  int poly_order = 3;
  double median_s = 5.0;
  double envelope_band_low_hz = 0.05;
  double envelope_band_high_hz = 3.0;
  int envelope_band_order = 4;
  double wavelet_band_hz = 0.05;

  /// Compact "name(key=value,...)" record for provenance.
  std::string describe() const;
};

EdaParams default_params(EdaMethod method);

/// The eight extractors in their canonical order.
std::vector<EdaParams> enumerate_methods();

/// Applies the method's smoother to a gap-free series sampled at `fs`.
///
/// The envelope method band-passes, demodulates with the analytic signal, adds
/// back the sub-band trend the band-pass removed, then low-passes; a constant
/// input therefore comes back unchanged.
Series smooth_eda(const Eigen::Ref<const Series>& x, double fs, const EdaParams& params);

/// Sudomotor trend at 1 Hz from a trace sampled at an integer rate (30 Hz in
/// the pipeline). Gaps of at most `max_bridge_s` are linearly bridged first;
/// longer gaps are filled for filtering but stay invalid in the output.
/// Requires `min_valid_s` seconds of valid data.
BiosignalEstimate extract_eda_trend(const RoiTrace& trace, const EdaParams& params,
                                    double min_valid_s = 60.0, double max_bridge_s = 2.0);

}  // namespace thermosig
