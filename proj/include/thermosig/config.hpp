#pragma once

#include "thermosig/aggregate.hpp"
#include "thermosig/cardio.hpp"
#include "thermosig/eda.hpp"
#include "thermosig/roi.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace thermosig {

/// Every constant of the frame-to-signal chain.
struct PipelineConfig {
  double pipeline_fps = 30.0;
  double landmark_alpha = 0.15;
  double max_carry_s = 2.0;
  RoiGeometry geometry;
  AggregationMap aggregations;  // empty entries fall back to default_aggregation
  double resample_max_gap_s = 2.0;
  double eda_min_valid_s = 60.0;
  double eda_max_bridge_s = 2.0;
  double max_lag_s = 120.0;
  double min_overlap_s = 120.0;
  Eigen::Index min_rate_samples = 30;
  HrConfig hr;
  BrConfig br;
};

struct SweepGrid {
  std::vector<RoiKind> rois{kGeometryRois.begin(), kGeometryRois.end()};
  std::vector<EdaParams> methods = enumerate_methods();
  std::vector<std::string> eda_references{"PEDA", "PP", "PP_NR"};
  std::string hr_reference = "HR";
  std::string br_reference = "BR";
  bool rates = true;  // also run the HR/BR chains when their references exist
};

struct RunConfig {
  PipelineConfig pipeline;
  SweepGrid sweep;
  std::string out_dir = "out";
  int parallel = 1;
  std::uint64_t seed = 1;
};

/// Canonical JSON text (sorted keys, two-space indent).
std::string to_json_string(const RunConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// 64-bit FNV-1a of the canonical JSON with out_dir and parallel blanked, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// Config file named by THERMOSIG_CONFIG when set, defaults otherwise.
RunConfig default_run_config();

}  // namespace thermosig
