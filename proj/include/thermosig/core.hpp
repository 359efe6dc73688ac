#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace thermosig {

using Series = Eigen::VectorXd;
using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// Row-major 2D image; rows are scanlines (height), columns are pixels (width).
template <typename Scalar>
using Image = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RawFrame = Image<std::uint16_t>;
using Frame8 = Image<std::uint8_t>;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Base of every error raised for bad input. Anything else escaping the
/// library is an internal fault.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class TooFewSamples : public Error {
 public:
  TooFewSamples(std::string_view what, std::size_t required, std::size_t actual);
  std::size_t required() const noexcept { return required_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t required_;
  std::size_t actual_;
};

class NonFiniteValue : public Error {
 public:
  explicit NonFiniteValue(std::size_t index);
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Malformed file content. `row` is 1-based over data rows (0 when not row-specific).
class ParseError : public Error {
 public:
  ParseError(std::string message, std::size_t row = 0, std::string column = {});
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

// ---------------------------------------------------------------------------
// Frames and landmarks
// ---------------------------------------------------------------------------

class ThermalFrameSequence {
 public:
  ThermalFrameSequence() = default;
  /// Throws InvalidArgument on mismatched dimensions, fps <= 0, or bad timestamps.
  ThermalFrameSequence(std::vector<RawFrame> frames, double fps,
                       std::vector<double> timestamps = {});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double fps() const noexcept { return fps_; }
  std::size_t size() const noexcept { return frames_.size(); }
  const RawFrame& frame(std::size_t i) const { return frames_.at(i); }
  const std::vector<RawFrame>& frames() const noexcept { return frames_; }
  bool has_timestamps() const noexcept { return !timestamps_.empty(); }
  /// Timestamp of frame i; uniform grid at the nominal fps when none were given.
  double time_of(std::size_t i) const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<RawFrame> frames_;
  double fps_ = 7.5;
  std::vector<double> timestamps_;
};

struct BBox {
  double x = 0, y = 0, w = 0, h = 0;
};

enum class Landmark : int { EyeL = 0, EyeR = 1, Nose = 2, MouthL = 3, MouthR = 4 };

struct LandmarkFrame {
  std::int64_t frame_idx = 0;
  double confidence = 1.0;
  BBox bbox;
  std::array<Eigen::Vector2d, 5> points{};

  const Eigen::Vector2d& point(Landmark l) const { return points[static_cast<int>(l)]; }
  Eigen::Vector2d& point(Landmark l) { return points[static_cast<int>(l)]; }
};

class LandmarkTrack {
 public:
  LandmarkTrack() = default;
  /// Entries must already be ordered with at most one per frame and positive bbox.
  explicit LandmarkTrack(std::vector<LandmarkFrame> entries);

  /// Orders raw detections by frame and keeps the highest-confidence one per frame.
  static LandmarkTrack from_detections(std::vector<LandmarkFrame> detections);

  const std::vector<LandmarkFrame>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

 private:
  std::vector<LandmarkFrame> entries_;
};

// ---------------------------------------------------------------------------
// ROIs, aggregation, traces
// ---------------------------------------------------------------------------

enum class RoiKind { Nose, EyeL, EyeR, CheekL, CheekR, Forehead, CheeksAvg, EyesAvg };

inline constexpr std::array<RoiKind, 6> kGeometryRois = {
    RoiKind::Nose, RoiKind::EyeL, RoiKind::EyeR, RoiKind::CheekL, RoiKind::CheekR, RoiKind::Forehead};

bool is_derived(RoiKind kind) noexcept;
/// Members averaged to form a derived kind. Throws for geometry kinds.
std::array<RoiKind, 2> derived_members(RoiKind kind);
std::string_view to_string(RoiKind kind) noexcept;
RoiKind parse_roi(std::string_view name);

struct AggregationKind {
  enum class Type { Mean, GaussianWeightedMean, TrimmedMean, HottestFractionMean };
  Type type = Type::Mean;
  /// sigma factor, trim fraction per tail, or hottest fraction; unused for Mean.
  double param = 0.0;

  static AggregationKind mean() { return {Type::Mean, 0.0}; }
  static AggregationKind gaussian(double sigma_factor = 0.35) {
    return {Type::GaussianWeightedMean, sigma_factor};
  }
  static AggregationKind trimmed(double trim_fraction = 0.10) {
    return {Type::TrimmedMean, trim_fraction};
  }
  static AggregationKind hottest(double fraction = 0.30) {
    return {Type::HottestFractionMean, fraction};
  }

  /// Throws InvalidArgument when param is outside the kind's domain.
  void validate() const;
  friend bool operator==(const AggregationKind&, const AggregationKind&) = default;
};

std::string to_string(const AggregationKind& kind);
AggregationKind parse_aggregation(std::string_view text);

struct RoiTrace {
  RoiKind roi = RoiKind::Nose;
  AggregationKind aggregation;
  double fps = 7.5;
  Series values;
  Mask valid;

  Eigen::Index size() const noexcept { return values.size(); }
  void validate() const;
};

// ---------------------------------------------------------------------------
// Outputs
// ---------------------------------------------------------------------------

enum class BiosignalKind { EdaTrend, HeartRate, BreathingRate };
std::string_view to_string(BiosignalKind kind) noexcept;
BiosignalKind parse_biosignal_kind(std::string_view name);

struct BiosignalEstimate {
  BiosignalKind kind = BiosignalKind::EdaTrend;
  double rate_hz = 1.0;
  Series values;
  Mask valid;
  double t0 = 0.0;
  /// Free-form description of the method and parameters that produced it.
  std::string provenance;

  Eigen::Index size() const noexcept { return values.size(); }
  double time_at(Eigen::Index i) const noexcept { return t0 + static_cast<double>(i) / rate_hz; }
  Eigen::Index valid_count() const { return valid.count(); }
};

enum class Condition { PD, ND, CD, ED, Other };
enum class Sex { F, M, Unknown };
enum class AgeGroup { Young, Older, Unknown };

struct SessionMeta {
  std::string session_id;
  std::string subject_id;
  Condition condition = Condition::Other;
  std::string condition_label = "Other";  // verbatim label; meaningful for Other
  Sex sex = Sex::Unknown;
  AgeGroup age_group = AgeGroup::Unknown;

  std::string condition_name() const;
};

std::string_view to_string(Sex s) noexcept;
std::string_view to_string(AgeGroup a) noexcept;
Condition parse_condition(std::string_view s) noexcept;
Sex parse_sex(std::string_view s) noexcept;
AgeGroup parse_age_group(std::string_view s) noexcept;

/// Contact ground truth with explicit (possibly non-uniform) timestamps.
struct ReferenceSignal {
  std::string name;
  std::string units;
  std::vector<double> time;
  Series values;
  bool uniform = true;
  double rate = 1.0;  // mean rate when non-uniform

  /// Builds from strictly increasing timestamps; infers rate and uniformity.
  static ReferenceSignal from_samples(std::string name, std::string units,
                                      std::vector<double> time, Series values);
  /// Uniform grid starting at t0.
  static ReferenceSignal uniform_grid(std::string name, std::string units, const Series& values,
                                      double rate, double t0 = 0.0);
};

}  // namespace thermosig
