#include "thermosig/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace thermosig {
namespace {

// Fraction-of-count helpers absorb representation error (0.3 * 10 > 3 in binary).
std::size_t floor_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}
std::size_t ceil_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

std::size_t roi_slot(RoiKind kind) {
  for (std::size_t k = 0; k < kGeometryRois.size(); ++k)
    if (kGeometryRois[k] == kind) return k;
  throw InvalidArgument("not a geometry ROI: " + std::string(to_string(kind)));
}

}  // namespace

double aggregate_values(std::span<const double> pixels, Eigen::Index rows, Eigen::Index cols,
                        const AggregationKind& kind) {
  kind.validate();
  const std::size_t n = pixels.size();
  if (n == 0) throw InvalidArgument("aggregate: empty patch");
  if (static_cast<std::size_t>(rows * cols) != n) throw InvalidArgument("aggregate: shape mismatch");

  switch (kind.type) {
    case AggregationKind::Type::Mean:
      return std::accumulate(pixels.begin(), pixels.end(), 0.0) / static_cast<double>(n);

    case AggregationKind::Type::GaussianWeightedMean: {
      auto axis_weights = [&](Eigen::Index len) {
        Eigen::VectorXd w(len);
        const double center = 0.5 * static_cast<double>(len - 1);
        const double sigma = kind.param * 0.5 * static_cast<double>(len);
        for (Eigen::Index i = 0; i < len; ++i) {
          const double z = (static_cast<double>(i) - center) / sigma;
          w[i] = std::exp(-0.5 * z * z);
        }
        return w;
      };
      const Eigen::VectorXd wy = axis_weights(rows);
      const Eigen::VectorXd wx = axis_weights(cols);
      double num = 0.0;
      for (Eigen::Index r = 0; r < rows; ++r) {
        double row_sum = 0.0;
        for (Eigen::Index c = 0; c < cols; ++c) row_sum += wx[c] * pixels[static_cast<std::size_t>(r * cols + c)];
        num += wy[r] * row_sum;
      }
      return num / (wy.sum() * wx.sum());
    }

    case AggregationKind::Type::TrimmedMean: {
      if (n < 4) throw TooFewSamples("trimmed mean", 4, n);
      std::vector<double> v(pixels.begin(), pixels.end());
      std::sort(v.begin(), v.end());
      const std::size_t k = floor_count(kind.param, n);
      return std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(k),
                             v.end() - static_cast<std::ptrdiff_t>(k), 0.0) /
             static_cast<double>(n - 2 * k);
    }

    case AggregationKind::Type::HottestFractionMean: {
      if (n < 4) throw TooFewSamples("hottest-fraction mean", 4, n);
      const std::size_t k = std::max<std::size_t>(1, ceil_count(kind.param, n));
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      // descending value, ties by row-major index
      std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                        [&](std::size_t a, std::size_t b) {
                          return pixels[a] > pixels[b] || (pixels[a] == pixels[b] && a < b);
                        });
      double sum = 0.0;
      for (std::size_t i = 0; i < k; ++i) sum += pixels[idx[i]];
      return sum / static_cast<double>(k);
    }
  }
  return 0.0;
}

AggregationKind default_aggregation(RoiKind roi) {
  switch (roi) {
    case RoiKind::Nose:
    case RoiKind::CheekL:
    case RoiKind::CheekR:
    case RoiKind::Forehead: return AggregationKind::gaussian(0.35);
    case RoiKind::EyeL:
    case RoiKind::EyeR: return AggregationKind::trimmed(0.10);
    default: throw InvalidArgument("no default aggregation for derived ROI " + std::string(to_string(roi)));
  }
}

TraceExtractor::TraceExtractor(std::vector<RoiKind> requested, AggregationMap aggregations, double fps)
    : requested_(std::move(requested)), aggregations_(std::move(aggregations)), fps_(fps) {
  if (!(fps_ > 0.0)) throw InvalidArgument("fps must be positive");
  for (RoiKind k : requested_) {
    if (is_derived(k)) {
      for (RoiKind m : derived_members(k)) needed_[roi_slot(m)] = true;
    } else {
      needed_[roi_slot(k)] = true;
    }
  }
  for (std::size_t s = 0; s < needed_.size(); ++s) {
    if (!needed_[s]) continue;
    auto it = aggregations_.find(kGeometryRois[s]);
    if (it == aggregations_.end()) aggregations_[kGeometryRois[s]] = default_aggregation(kGeometryRois[s]);
    else it->second.validate();
  }
}

void TraceExtractor::add_frame(const RawFrame& frame, const FrameRois& rois) {
  for (std::size_t s = 0; s < needed_.size(); ++s) {
    if (!needed_[s]) continue;
    const RoiRect& r = rois[s];
    const AggregationKind& kind = aggregations_.at(kGeometryRois[s]);
    bool ok = r.valid && r.x + r.w <= frame.cols() && r.y + r.h <= frame.rows();
    const bool needs_four = kind.type == AggregationKind::Type::TrimmedMean ||
                            kind.type == AggregationKind::Type::HottestFractionMean;
    if (ok && needs_four && r.w * r.h < 4) ok = false;
    double v = 0.0;
    if (ok) v = aggregate_patch(frame.block(r.y, r.x, r.h, r.w), kind);
    values_[s].push_back(v);
    valid_[s].push_back(ok);
  }
}

std::vector<RoiTrace> TraceExtractor::finish() const {
  auto base = [&](RoiKind k) {
    const std::size_t s = roi_slot(k);
    RoiTrace t;
    t.roi = k;
    t.aggregation = aggregations_.at(k);
    t.fps = fps_;
    const auto n = static_cast<Eigen::Index>(values_[s].size());
    t.values = Eigen::Map<const Series>(values_[s].data(), n);
    t.valid.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) t.valid[i] = valid_[s][static_cast<std::size_t>(i)];
    return t;
  };
  std::vector<RoiTrace> out;
  out.reserve(requested_.size());
  for (RoiKind k : requested_) {
    if (is_derived(k)) {
      const auto m = derived_members(k);
      out.push_back(combine_traces(k, base(m[0]), base(m[1])));
    } else {
      out.push_back(base(k));
    }
  }
  return out;
}

std::vector<RoiTrace> extract_traces(const ThermalFrameSequence& seq, const std::vector<FrameRois>& rois,
                                     const std::vector<RoiKind>& requested,
                                     const AggregationMap& aggregations) {
  if (rois.size() != seq.size())
    throw InvalidArgument("extract_traces: " + std::to_string(rois.size()) + " ROI sets for " +
                          std::to_string(seq.size()) + " frames");
  TraceExtractor ex(requested, aggregations, seq.fps());
  for (std::size_t f = 0; f < seq.size(); ++f) ex.add_frame(seq.frame(f), rois[f]);
  return ex.finish();
}

RoiTrace combine_traces(RoiKind derived, const RoiTrace& a, const RoiTrace& b) {
  a.validate();
  b.validate();
  if (a.size() != b.size()) throw InvalidArgument("combine_traces: length mismatch");
  RoiTrace t;
  t.roi = derived;
  t.aggregation = a.aggregation;
  t.fps = a.fps;
  t.values = 0.5 * (a.values + b.values);
  t.valid = a.valid && b.valid;
  return t;
}

}  // namespace thermosig
