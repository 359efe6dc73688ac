#pragma once

#include "thermosig/core.hpp"
#include "thermosig/roi.hpp"

#include <map>
#include <span>
#include <vector>

namespace thermosig {

/// Reduces a row-major rows x cols patch to one value.
///
/// Mean: arithmetic mean. GaussianWeightedMean: separable Gaussian centred on
/// the patch with sigma = param * (extent / 2) per axis, evaluated at pixel
/// centres and normalised over the patch. TrimmedMean: drops floor(param * n)
/// values from each tail. HottestFractionMean: mean of the ceil(param * n)
/// largest values.
double aggregate_values(std::span<const double> pixels, Eigen::Index rows, Eigen::Index cols,
                        const AggregationKind& kind);

template <typename Derived>
double aggregate_patch(const Eigen::DenseBase<Derived>& patch, const AggregationKind& kind) {
  std::vector<double> pixels;
  pixels.reserve(static_cast<std::size_t>(patch.size()));
  for (Eigen::Index r = 0; r < patch.rows(); ++r)
    for (Eigen::Index c = 0; c < patch.cols(); ++c) pixels.push_back(static_cast<double>(patch(r, c)));
  return aggregate_values(pixels, patch.rows(), patch.cols(), kind);
}

/// Gaussian weighting for nose, cheeks and forehead; trimmed mean for the
/// periorbital regions. Derived kinds are rejected.
AggregationKind default_aggregation(RoiKind roi);

using AggregationMap = std::map<RoiKind, AggregationKind>;

/// Accumulates ROI traces frame by frame so long recordings need not be held
/// in memory. Derived kinds are formed at finish() as the per-sample mean of
/// their members, valid only where both members are.
class TraceExtractor {
 public:
  TraceExtractor(std::vector<RoiKind> requested, AggregationMap aggregations, double fps);

  void add_frame(const RawFrame& frame, const FrameRois& rois);
  std::vector<RoiTrace> finish() const;

 private:
  std::vector<RoiKind> requested_;
  AggregationMap aggregations_;
  double fps_;
  std::array<bool, 6> needed_{};
  std::array<std::vector<double>, 6> values_;
  std::array<std::vector<bool>, 6> valid_;
};

/// One trace per requested ROI. `rois` must have one entry per frame; missing
/// aggregation entries fall back to default_aggregation.
std::vector<RoiTrace> extract_traces(const ThermalFrameSequence& seq, const std::vector<FrameRois>& rois,
                                     const std::vector<RoiKind>& requested,
                                     const AggregationMap& aggregations = {});

/// Per-sample mean of two equally sampled traces, valid where both are.
RoiTrace combine_traces(RoiKind derived, const RoiTrace& a, const RoiTrace& b);

}  // namespace thermosig
