#pragma once

#include "thermosig/core.hpp"
#include "thermosig/dsp.hpp"

#include <vector>

namespace thermosig {

/// Sliding-window spectral rate tracker settings.
struct RateEstimatorConfig {
  double band_low_hz = 1.0;   // peak search band
  double band_high_hz = 3.5;
  double window_s = 15.0;
  double step_s = 1.0;
  double valid_low_bpm = 60.0;
  double valid_high_bpm = 180.0;
  int gap_max = 10;     // longest invalid run (samples) bridged by interpolation
  int median_len = 7;   // applied only when `apply_median`
  bool apply_median = true;
  /// Windows whose band peak / median band power falls below this are invalid.
  double min_peak_ratio = 6.0;
  /// Windows with a smaller fraction of valid input samples are invalid.
  double min_valid_fraction = 0.5;

  static RateEstimatorConfig cardiac();
  static RateEstimatorConfig respiratory();
  void validate(double fs) const;
};

/// Welch layout used inside one analysis window: half-window Hann segments,
/// 50 % overlap, nfft = 4 * next power of two of the segment.
struct WelchLayout {
  Eigen::Index seg_len = 0;
  Eigen::Index nfft = 0;
  static WelchLayout for_window(Eigen::Index window_samples);
};

struct OmitResult {
  Series signal;                  // selected residual (or raw channel on fallback)
  int selected = -1;              // index into the input channel list
  int dominant = -1;              // channel whose direction was projected out
  bool fallback = false;          // rank-deficient input
  std::vector<double> peak_ratios;  // per channel; 0 where not a candidate
};

/// Multi-channel fusion by QR: rows are standardised, channels ordered by
/// descending raw variance (ties keep input order), the first orthonormal
/// time-course is projected out of every channel, and the residual with the
/// highest band peak-to-median power ratio is returned.
OmitResult omit_fuse(const std::vector<Series>& channels, double fs, double band_low_hz, double band_high_hz,
                     double segment_s = 7.5);

/// One estimate per step, stamped at window centres; bpm = 60 * peak frequency.
BiosignalEstimate estimate_rate_track(const Eigen::Ref<const Series>& x, const Mask& valid, double fs,
                                      const RateEstimatorConfig& cfg, BiosignalKind kind);

/// Range filter, short-gap interpolation, optional median over valid spans.
BiosignalEstimate postprocess_rates(const BiosignalEstimate& raw, const RateEstimatorConfig& cfg);

struct HrConfig {
  double prefilter_low_hz = 0.3;
  double prefilter_high_hz = 4.0;
  int prefilter_order = 4;
  int band_order = 4;
  double max_bridge_s = 2.0;
  double min_valid_s = 30.0;
  RateEstimatorConfig rate = RateEstimatorConfig::cardiac();
};

struct BrConfig {
  double prefilter_low_hz = 0.12;
  double prefilter_high_hz = 2.0;
  int prefilter_order = 4;
  double max_bridge_s = 2.0;
  double min_valid_s = 30.0;
  RateEstimatorConfig rate = RateEstimatorConfig::respiratory();
};

struct HrResult {
  BiosignalEstimate estimate;
  OmitResult omit;
  std::vector<RoiKind> channels;
  bool degraded = false;  // fewer than four channels available
};

/// Heart rate from forehead, nose and both cheeks (at least two required).
HrResult estimate_hr(const std::vector<RoiTrace>& traces, const HrConfig& cfg = {});

/// Breathing rate from the nose trace averaged with whichever cheeks exist.
BiosignalEstimate estimate_br(const std::vector<RoiTrace>& traces, const BrConfig& cfg = {});

}  // namespace thermosig
