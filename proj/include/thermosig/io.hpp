#pragma once

#include "thermosig/core.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace thermosig {

namespace fs = std::filesystem;

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
/// Whole-field numeric parse (surrounding whitespace allowed); nullopt otherwise.
std::optional<double> parse_double(std::string_view text);

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

/// A directory of 16-bit single-channel PGM/PNG files in lexicographic order,
/// or a raw little-endian u16 file with a "<file>.json" sidecar
/// {width, height, count, dtype: "u16le", fps}. `fps` overrides the sidecar
/// and is required for directories.
ThermalFrameSequence load_frames(const fs::path& path, std::optional<double> fps = std::nullopt);

/// Writes frame_000000.pgm ... into `dir`.
void write_frames_pgm(const fs::path& dir, const ThermalFrameSequence& seq);
void write_frame_png(const fs::path& file, const RawFrame& frame);
/// Raw u16le stack plus its JSON sidecar.
void write_frames_raw(const fs::path& file, const ThermalFrameSequence& seq);

// ---------------------------------------------------------------------------
// Landmarks, references, traces, estimates
// ---------------------------------------------------------------------------

LandmarkTrack load_landmarks(const fs::path& path);
void write_landmarks(const fs::path& path, const LandmarkTrack& track);

/// CSV time_s,value with strictly increasing time.
ReferenceSignal load_reference(const fs::path& path, std::string name, std::string units = {});
void write_reference(const fs::path& path, const ReferenceSignal& ref);

/// frame_idx,time_s,<roi>:<aggregation>,...; an empty cell marks an invalid sample.
void write_traces(const fs::path& path, const std::vector<RoiTrace>& traces);
std::vector<RoiTrace> load_traces(const fs::path& path, double fps);

/// time_s,value,valid
void write_estimate(const fs::path& path, const BiosignalEstimate& est);
BiosignalEstimate load_estimate(const fs::path& path, BiosignalKind kind);

// ---------------------------------------------------------------------------
// Sessions
// ---------------------------------------------------------------------------

/// Units of the known reference names (PEDA kOhm, PP/PP_NR degC^2, HR/BR bpm).
std::string reference_units(std::string_view name);

/// One session directory: meta.json, traces.csv and/or frames/ + landmarks.csv,
/// refs/<NAME>.csv.
struct SessionBundle {
  SessionMeta meta;
  double fps = 7.5;
  std::optional<ThermalFrameSequence> frames;
  std::optional<LandmarkTrack> landmarks;
  std::vector<RoiTrace> traces;
  std::map<std::string, ReferenceSignal> references;
};

/// Loads what is present; frames are loaded only when there is no traces.csv
/// or `with_frames` is set. Missing reference files are simply absent.
SessionBundle load_session(const fs::path& dir, bool with_frames = false);
void write_session(const fs::path& dir, const SessionBundle& bundle);

/// `root` itself when it holds meta.json, else its sub-directories that do, sorted.
std::vector<fs::path> find_sessions(const fs::path& root);

std::string read_text(const fs::path& path);
/// Writes through a temporary file then renames.
void write_text(const fs::path& path, std::string_view text);

}  // namespace thermosig
