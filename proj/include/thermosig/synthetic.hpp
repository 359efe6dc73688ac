#pragma once

#include "thermosig/core.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace thermosig {

/// Seeded normal deviates: std::mt19937_64 feeding a Box-Muller transform
/// written out here, so a seed maps to the same numbers on every standard
/// library (std::normal_distribution is implementation-defined).
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}
  double uniform();  // (0, 1]
  double normal();
  Series normal(Eigen::Index n, double sigma = 1.0);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Piecewise-linear bpm profile with an optional sinusoidal modulation.
struct RateProfile {
  std::vector<std::pair<double, double>> points{{0.0, 72.0}};  // (time s, bpm), time increasing
  double modulation_bpm = 0.0;
  double modulation_period_s = 120.0;

  static RateProfile constant(double bpm) { return {{{0.0, bpm}}, 0.0, 120.0}; }
  static RateProfile ramp(double t0, double bpm0, double t1, double bpm1) { return {{{t0, bpm0}, {t1, bpm1}}, 0.0, 120.0}; }
  double bpm_at(double t) const;
};

struct SyntheticSpec {
  double duration_s = 600.0;
  double fps = 7.5;
  std::uint64_t seed = 1;
  double baseline = 30000.0;  // counts

  struct Eda {
    double band_limit_hz = 0.05;  // shaped by a lowpass at 0.6x this edge
    double amplitude = 40.0;
    double polarity = 1.0;
  } eda;
  struct Cardiac {
    RateProfile bpm = RateProfile::constant(72.0);
    double amplitude = 0.5;
  } cardiac;
  struct Resp {
    RateProfile bpm = RateProfile::constant(15.0);
    double amplitude = 2.0;
  } resp;
  struct Artifact {
    double freq_hz = 0.7;  // between the respiratory and cardiac bands
    double amplitude = 5.0;
  } artifact;
  struct Noise {
    double white_sigma = 0.0;
    double drift = 0.0;  // random-walk step sigma per sample
  } noise;
  struct Motion {
    double jitter_px = 0.0;
  } motion;

  /// Throws InvalidArgument for duration < 60 s, fps <= 0, negative amplitudes or |polarity| != 1.
  void validate() const;
};

/// Per-ROI weights of each embedded component.
struct RoiMixing {
  double eda = 0.0;
  double cardiac = 0.0;
  double resp = 0.0;
};
RoiMixing roi_mixing(RoiKind roi);

/// Clean unit-scale components on the native timeline, before weighting.
struct SyntheticComponents {
  Series eda;       // zero mean, unit std
  Series cardiac;   // sin(phi) + 0.3 sin(2 phi)
  Series resp;      // sin(phi)
  Series artifact;  // sin(2 pi f t)
  Series hr_bpm;
  Series br_bpm;
};

struct SyntheticSession {
  SessionMeta meta;
  std::vector<RoiTrace> traces;  // the six geometry ROIs at spec.fps, mean aggregation
  std::map<std::string, ReferenceSignal> references;  // "PEDA", "HR", "BR"
  LandmarkTrack landmarks;  // canonical layout in a 160x128 frame, jittered when requested
  SyntheticComponents components;
};

SyntheticSession gen_session(const SyntheticSpec& spec);

/// Landmarks of the canonical frontal layout for a frame of the given size.
LandmarkFrame canonical_landmarks(int width, int height);

struct RenderOptions {
  int width = 160;
  int height = 128;
  double pixel_noise_sigma = 0.0;
  double landmark_jitter_px = 0.0;
  std::uint64_t seed = 1;
  /// Background counts; when unset the mean of every trace sample is used.
  std::optional<double> background;
};

struct RenderedSession {
  ThermalFrameSequence frames;
  LandmarkTrack landmarks;
};

/// Paints each ROI's canonical rectangle with its trace value (plus pixel
/// noise) over a constant background and emits the matching landmark track.
/// Throws InvalidArgument when the frame is too small for the layout or the
/// traces differ in length, and when a pixel would leave [0, 65535].
RenderedSession render_frames(const std::vector<RoiTrace>& traces, const RenderOptions& options = {});

}  // namespace thermosig
