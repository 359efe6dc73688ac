#pragma once

#include "thermosig/core.hpp"

#include <span>

namespace thermosig {

/// A uniformly sampled series with a validity mask.
struct SampledSeries {
  Series values;
  Mask valid;
  double rate = 1.0;
  double t0 = 0.0;

  Eigen::Index size() const noexcept { return values.size(); }
  double time_at(Eigen::Index i) const noexcept { return t0 + static_cast<double>(i) / rate; }
};

enum class InterpMethod { CubicSpline, Linear, Hold };

/// Resamples onto a uniform grid at `target_rate` spanning the same interval.
///
/// Valid samples act as knots; output samples inside a gap between knots
/// wider than `max_gap_s`, or outside the first/last knot, stay invalid.
/// The cubic spline uses natural boundary conditions. Output sample k*ratio
/// coincides with input sample k when the rates are integer multiples.
SampledSeries resample_to_timeline(const SampledSeries& series, double target_rate,
                                   InterpMethod method, double max_gap_s = 2.0);

/// Piecewise-linear interpolation of (t, y) at query times. Queries outside
/// [t.front(), t.back()] are clamped to the end values and flagged in `inside`.
Series interp_linear(std::span<const double> t, const Eigen::Ref<const Series>& y,
                     std::span<const double> query, Mask* inside = nullptr);

/// Fills invalid runs by linear interpolation between valid neighbours.
/// Runs of at most `max_gap` samples become valid; longer interior runs are
/// filled but stay invalid; leading/trailing runs hold the nearest valid value
/// and stay invalid. Requires at least one valid sample.
void bridge_gaps(Series& values, Mask& valid, Eigen::Index max_gap);

}  // namespace thermosig
