#pragma once

#include "thermosig/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace thermosig {

/// Axis-aligned integer rectangle clipped to the frame. `valid` is false when
/// nothing of the rectangle survives clipping (or the frame has no face).
struct RoiRect {
  RoiKind roi = RoiKind::Nose;
  int x = 0, y = 0, w = 0, h = 0;
  bool valid = false;

  friend bool operator==(const RoiRect&, const RoiRect&) = default;
};

using FrameRois = std::array<RoiRect, 6>;  // indexed like kGeometryRois

/// Region proportions relative to the face box (b_w, b_h).
struct RoiGeometry {
  double nose_w = 0.30, nose_h = 0.15;
  double eye_w = 0.24, eye_h = 0.12;
  double cheek_w = 0.20, cheek_h = 0.20;
  double forehead_w = 0.45, forehead_h = 0.18;
  /// Periorbital centre moves from the eye centre toward the midline by this
  /// fraction of the inter-eye distance (inner-canthus proxy).
  double canthus_shift = 0.25;
  /// Cheek centre moves away from the midline by this fraction of b_w.
  double cheek_lateral = 0.10;
  /// Gap between the inter-eye midpoint and the forehead's bottom edge, in b_h.
  double forehead_gap = 0.15;
};

/// Exponential moving average over every coordinate of the track (points,
/// bbox and confidence), seeded with the first entry.
LandmarkTrack smooth_landmarks(const LandmarkTrack& track, double alpha = 0.15);

/// The six facial regions for one detection, clipped to `width` x `height`.
FrameRois derive_rois(const LandmarkFrame& landmarks, int width, int height,
                      const RoiGeometry& geometry = {});

/// Per-frame regions for a whole sequence. Frames without a detection reuse the
/// most recent (smoothed) landmarks for up to `max_carry_s`, then go invalid.
std::vector<FrameRois> track_rois(const LandmarkTrack& smoothed, std::size_t n_frames, int width,
                                  int height, double fps, double max_carry_s = 2.0,
                                  const RoiGeometry& geometry = {});

/// Percentile of `sorted` (ascending) with linear interpolation between ranks.
double percentile_sorted(const std::vector<double>& sorted, double pct);

/// Maps a radiometric frame to 8 bits: values <= P_lo go to 0, values >= P_hi
/// (and above P_lo) go to 255, linear in between. Constant frames map to 0.
template <typename Derived>
Frame8 percentile_stretch(const Eigen::DenseBase<Derived>& frame, double lo_pct = 2.0,
                          double hi_pct = 98.0) {
  if (frame.size() == 0) throw InvalidArgument("percentile_stretch: empty frame");
  std::vector<double> sorted;
  sorted.reserve(static_cast<std::size_t>(frame.size()));
  for (Eigen::Index r = 0; r < frame.rows(); ++r)
    for (Eigen::Index c = 0; c < frame.cols(); ++c) sorted.push_back(static_cast<double>(frame(r, c)));
  std::sort(sorted.begin(), sorted.end());
  const double lo = percentile_sorted(sorted, lo_pct);
  const double hi = percentile_sorted(sorted, hi_pct);

  Frame8 out(frame.rows(), frame.cols());
  for (Eigen::Index r = 0; r < frame.rows(); ++r) {
    for (Eigen::Index c = 0; c < frame.cols(); ++c) {
      const double v = static_cast<double>(frame(r, c));
      if (v <= lo) {
        out(r, c) = 0;
      } else if (v >= hi) {
        out(r, c) = 255;
      } else {
        out(r, c) = static_cast<std::uint8_t>(std::round(255.0 * (v - lo) / (hi - lo)));
      }
    }
  }
  return out;
}

}  // namespace thermosig
