#include "thermosig/core.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace thermosig {

TooFewSamples::TooFewSamples(std::string_view what, std::size_t required, std::size_t actual)
    : Error(std::string(what) + ": too few samples (need at least " + std::to_string(required) +
            ", got " + std::to_string(actual) + ")"),
      required_(required),
      actual_(actual) {}

NonFiniteValue::NonFiniteValue(std::size_t index)
    : Error("non-finite value at index " + std::to_string(index)), index_(index) {}

ParseError::ParseError(std::string message, std::size_t row, std::string column)
    : Error(std::move(message)), row_(row), column_(std::move(column)) {}

// ---------------------------------------------------------------------------

ThermalFrameSequence::ThermalFrameSequence(std::vector<RawFrame> frames, double fps,
                                           std::vector<double> timestamps)
    : frames_(std::move(frames)), fps_(fps), timestamps_(std::move(timestamps)) {
  if (!(fps_ > 0.0) || !std::isfinite(fps_)) throw InvalidArgument("fps must be positive");
  if (!frames_.empty()) {
    height_ = static_cast<int>(frames_.front().rows());
    width_ = static_cast<int>(frames_.front().cols());
    for (std::size_t i = 1; i < frames_.size(); ++i) {
      if (frames_[i].rows() != height_ || frames_[i].cols() != width_)
        throw InvalidArgument("frame " + std::to_string(i) + " has mismatched dimensions");
    }
  }
  if (!timestamps_.empty()) {
    if (timestamps_.size() != frames_.size())
      throw InvalidArgument("timestamp count does not match frame count");
    for (std::size_t i = 1; i < timestamps_.size(); ++i)
      if (!(timestamps_[i] > timestamps_[i - 1]))
        throw InvalidArgument("timestamps not strictly increasing at index " + std::to_string(i));
  }
}

double ThermalFrameSequence::time_of(std::size_t i) const {
  if (!timestamps_.empty()) return timestamps_.at(i);
  return static_cast<double>(i) / fps_;
}

LandmarkTrack::LandmarkTrack(std::vector<LandmarkFrame> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (!(e.bbox.w > 0.0) || !(e.bbox.h > 0.0))
      throw InvalidArgument("landmark entry " + std::to_string(i) + " has non-positive bbox");
    if (i > 0 && e.frame_idx <= entries_[i - 1].frame_idx)
      throw InvalidArgument("landmark frame_idx must be strictly increasing (entry " +
                            std::to_string(i) + ")");
  }
}

LandmarkTrack LandmarkTrack::from_detections(std::vector<LandmarkFrame> detections) {
  std::stable_sort(detections.begin(), detections.end(),
                   [](const LandmarkFrame& a, const LandmarkFrame& b) { return a.frame_idx < b.frame_idx; });
  std::vector<LandmarkFrame> kept;
  kept.reserve(detections.size());
  for (auto& d : detections) {
    if (!kept.empty() && kept.back().frame_idx == d.frame_idx) {
      // first of equal confidences wins
      if (d.confidence > kept.back().confidence) kept.back() = d;
    } else {
      kept.push_back(d);
    }
  }
  return LandmarkTrack(std::move(kept));
}

// ---------------------------------------------------------------------------

bool is_derived(RoiKind kind) noexcept {
  return kind == RoiKind::CheeksAvg || kind == RoiKind::EyesAvg;
}

std::array<RoiKind, 2> derived_members(RoiKind kind) {
  switch (kind) {
    case RoiKind::CheeksAvg: return {RoiKind::CheekL, RoiKind::CheekR};
    case RoiKind::EyesAvg: return {RoiKind::EyeL, RoiKind::EyeR};
    default: throw InvalidArgument(std::string(to_string(kind)) + " is not a derived ROI");
  }
}

std::string_view to_string(RoiKind kind) noexcept {
  switch (kind) {
    case RoiKind::Nose: return "nose";
    case RoiKind::EyeL: return "eye_l";
    case RoiKind::EyeR: return "eye_r";
    case RoiKind::CheekL: return "cheek_l";
    case RoiKind::CheekR: return "cheek_r";
    case RoiKind::Forehead: return "forehead";
    case RoiKind::CheeksAvg: return "cheeks";
    case RoiKind::EyesAvg: return "eyes";
  }
  return "?";
}

RoiKind parse_roi(std::string_view name) {
  static const std::map<std::string_view, RoiKind> names = {
      {"nose", RoiKind::Nose},       {"eye_l", RoiKind::EyeL},     {"eye_r", RoiKind::EyeR},
      {"cheek_l", RoiKind::CheekL},  {"cheek_r", RoiKind::CheekR}, {"forehead", RoiKind::Forehead},
      {"cheeks", RoiKind::CheeksAvg}, {"eyes", RoiKind::EyesAvg}};
  auto it = names.find(name);
  if (it == names.end()) throw InvalidArgument("unknown ROI '" + std::string(name) + "'");
  return it->second;
}

void AggregationKind::validate() const {
  switch (type) {
    case Type::Mean: return;
    case Type::GaussianWeightedMean:
      if (!(param > 0.0)) throw InvalidArgument("gaussian sigma_factor must be > 0");
      return;
    case Type::TrimmedMean:
      if (!(param > 0.0 && param < 0.5)) throw InvalidArgument("trim_fraction must be in (0, 0.5)");
      return;
    case Type::HottestFractionMean:
      if (!(param > 0.0 && param <= 1.0)) throw InvalidArgument("hottest fraction must be in (0, 1]");
      return;
  }
}

std::string to_string(const AggregationKind& kind) {
  switch (kind.type) {
    case AggregationKind::Type::Mean: return "mean";
    case AggregationKind::Type::GaussianWeightedMean: return "gaussian";
    case AggregationKind::Type::TrimmedMean: return "trimmed";
    case AggregationKind::Type::HottestFractionMean: return "hottest";
  }
  return "?";
}

AggregationKind parse_aggregation(std::string_view text) {
  if (text == "mean") return AggregationKind::mean();
  if (text == "gaussian") return AggregationKind::gaussian();
  if (text == "trimmed") return AggregationKind::trimmed();
  if (text == "hottest") return AggregationKind::hottest();
  throw InvalidArgument("unknown aggregation '" + std::string(text) + "'");
}

void RoiTrace::validate() const {
  if (values.size() != valid.size()) throw InvalidArgument("trace values/valid length mismatch");
  if (!(fps > 0.0)) throw InvalidArgument("trace fps must be positive");
}

std::string_view to_string(BiosignalKind kind) noexcept {
  switch (kind) {
    case BiosignalKind::EdaTrend: return "eda";
    case BiosignalKind::HeartRate: return "hr";
    case BiosignalKind::BreathingRate: return "br";
  }
  return "?";
}

BiosignalKind parse_biosignal_kind(std::string_view name) {
  if (name == "eda") return BiosignalKind::EdaTrend;
  if (name == "hr") return BiosignalKind::HeartRate;
  if (name == "br") return BiosignalKind::BreathingRate;
  throw InvalidArgument("unknown signal kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

std::string SessionMeta::condition_name() const {
  switch (condition) {
    case Condition::PD: return "PD";
    case Condition::ND: return "ND";
    case Condition::CD: return "CD";
    case Condition::ED: return "ED";
    case Condition::Other: return condition_label;
  }
  return condition_label;
}

std::string_view to_string(Sex s) noexcept {
  switch (s) {
    case Sex::F: return "F";
    case Sex::M: return "M";
    default: return "Unknown";
  }
}

std::string_view to_string(AgeGroup a) noexcept {
  switch (a) {
    case AgeGroup::Young: return "Young";
    case AgeGroup::Older: return "Older";
    default: return "Unknown";
  }
}

Condition parse_condition(std::string_view s) noexcept {
  if (s == "PD") return Condition::PD;
  if (s == "ND") return Condition::ND;
  if (s == "CD") return Condition::CD;
  if (s == "ED") return Condition::ED;
  return Condition::Other;
}

Sex parse_sex(std::string_view s) noexcept {
  if (s == "F" || s == "f") return Sex::F;
  if (s == "M" || s == "m") return Sex::M;
  return Sex::Unknown;
}

AgeGroup parse_age_group(std::string_view s) noexcept {
  if (s == "Young" || s == "young" || s == "Y") return AgeGroup::Young;
  if (s == "Older" || s == "older" || s == "O") return AgeGroup::Older;
  return AgeGroup::Unknown;
}

ReferenceSignal ReferenceSignal::from_samples(std::string name, std::string units,
                                              std::vector<double> time, Series values) {
  if (time.size() != static_cast<std::size_t>(values.size()))
    throw InvalidArgument("reference time/value length mismatch");
  if (time.size() < 2) throw TooFewSamples("reference " + name, 2, time.size());
  for (std::size_t i = 1; i < time.size(); ++i)
    if (!(time[i] > time[i - 1]))
      throw InvalidArgument("reference time not increasing at index " + std::to_string(i));

  ReferenceSignal ref;
  ref.name = std::move(name);
  ref.units = std::move(units);
  const double span = time.back() - time.front();
  const double mean_dt = span / static_cast<double>(time.size() - 1);
  ref.rate = 1.0 / mean_dt;
  ref.uniform = true;
  for (std::size_t i = 1; i < time.size(); ++i) {
    if (std::abs((time[i] - time[i - 1]) - mean_dt) > 1e-6 * std::max(1.0, mean_dt)) {
      ref.uniform = false;
      break;
    }
  }
  ref.time = std::move(time);
  ref.values = std::move(values);
  return ref;
}

ReferenceSignal ReferenceSignal::uniform_grid(std::string name, std::string units,
                                              const Series& values, double rate, double t0) {
  std::vector<double> t(static_cast<std::size_t>(values.size()));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = t0 + static_cast<double>(i) / rate;
  auto ref = from_samples(std::move(name), std::move(units), std::move(t), values);
  ref.uniform = true;
  ref.rate = rate;
  return ref;
}

}  // namespace thermosig
