#pragma once

#include "thermosig/config.hpp"
#include "thermosig/io.hpp"
#include "thermosig/metrics.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace thermosig {

/// Frames + landmarks to per-ROI traces at the frame rate: landmark EMA,
/// ROI derivation with carry-forward, per-ROI aggregation. Derived ROIs in
/// `requested` are averaged from their members.
std::vector<RoiTrace> extract_session_traces(const ThermalFrameSequence& frames, const LandmarkTrack& landmarks,
                                             const std::vector<RoiKind>& requested, const PipelineConfig& cfg);

/// Spline resampling of every trace onto the pipeline rate.
std::vector<RoiTrace> resample_traces(const std::vector<RoiTrace>& traces, const PipelineConfig& cfg);

/// Trace for a ROI, combining members for derived kinds; nullopt when absent.
std::optional<RoiTrace> trace_for(const std::vector<RoiTrace>& traces, RoiKind roi);

struct SessionInput {
  SessionMeta meta;
  std::vector<RoiTrace> traces;  // any rate; resampled to the pipeline rate
  std::map<std::string, ReferenceSignal> references;
};

SessionInput to_session_input(const SessionBundle& bundle, const PipelineConfig& cfg);

struct EdaCell {
  std::string session_id;
  RoiKind roi = RoiKind::Nose;
  EdaMethod method = EdaMethod::ButterworthLp;
  std::string reference;
  std::optional<AgreementReport> report;
  std::string error;  // set when report is empty
};

struct RateCell {
  std::string session_id;
  BiosignalKind kind = BiosignalKind::HeartRate;
  std::string reference;
  std::optional<RateAgreement> report;
  double invalid_fraction = 1.0;
  std::string error;
};

struct MetricStats {
  double mean = 0.0;
  double std = 0.0;  // population
  std::size_t n = 0;
};

MetricStats summarize(const std::vector<double>& values);

struct CellSummary {
  std::string group_by;  // "all", "condition", "subject", "sex", "age_group"
  std::string group;
  RoiKind roi = RoiKind::Nose;
  EdaMethod method = EdaMethod::ButterworthLp;
  std::string reference;
  MetricStats pcc_abs, spearman, r_max, tau_star_s, trend_agreement;
  std::size_t errors = 0;
};

struct OracleEntry {
  std::string session_id;
  std::string reference;
  RoiKind roi = RoiKind::Nose;
  EdaMethod method = EdaMethod::ButterworthLp;
  double pcc_abs = 0.0;
};

struct OracleSummary {
  std::string reference;
  MetricStats pcc_abs;
  RoiKind best_fixed_roi = RoiKind::Nose;
  EdaMethod best_fixed_method = EdaMethod::ButterworthLp;
  double best_fixed_mean = 0.0;
};

/// Oracle configuration's trend next to its aligned reference, for overlays.
struct TrendOverlay {
  std::string session_id;
  std::string reference;
  RoiKind roi = RoiKind::Nose;
  EdaMethod method = EdaMethod::ButterworthLp;
  std::vector<double> time;
  std::vector<double> estimate;
  std::vector<double> reference_values;
};

struct SweepResult {
  std::vector<std::string> sessions;
  std::vector<EdaCell> grid;  // session, reference, roi, method order
  std::vector<RateCell> rates;
  std::vector<CellSummary> summaries;
  std::vector<OracleEntry> oracle;
  std::vector<OracleSummary> oracle_summary;
  std::vector<TrendOverlay> overlays;
};

/// Full ROI x method grid against every configured EDA reference present in a
/// session, plus HR/BR agreement when those references exist. Cell failures
/// are recorded, never thrown. Sessions run on up to `cfg.parallel` threads;
/// the result does not depend on the thread count.
SweepResult run_sweep(const std::vector<SessionInput>& sessions, const RunConfig& cfg);

/// Loads each session directory on demand inside the worker pool.
SweepResult run_sweep(const std::vector<fs::path>& session_dirs, const RunConfig& cfg);

/// Fraction of sessions whose polarity is Positive for one grid configuration.
double polarity_census(const SweepResult& result, RoiKind roi, EdaMethod method, const std::string& reference);

/// grid.csv, rates.csv, summary.json, provenance.json and trends/*.csv.
void write_sweep(const fs::path& dir, const SweepResult& result, const RunConfig& cfg);

/// Reads back the grid rows of grid.csv.
std::vector<EdaCell> load_grid(const fs::path& grid_csv);

/// Provenance record shared by every command's output.
std::string provenance_json(const RunConfig& cfg, std::string_view command,
                            const std::vector<std::string>& inputs);

}  // namespace thermosig
