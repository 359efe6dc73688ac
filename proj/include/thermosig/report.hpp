#pragma once

#include "thermosig/sweep.hpp"

#include <string>
#include <vector>

namespace thermosig {

/// Mean +- std of pcc_abs per (roi, method), one row per grid configuration
/// and one column pair per reference, recomputed from grid cells.
std::string summary_table_csv(const std::vector<EdaCell>& grid);

/// ROI x method heatmap of mean pcc_abs against one reference.
std::string heatmap_svg(const std::vector<EdaCell>& grid, const std::string& reference);

/// Histogram of tau_star over all evaluated cells against one reference.
std::string lag_histogram_svg(const std::vector<EdaCell>& grid, const std::string& reference, double bin_s = 10.0);

/// Both series z-scored on shared axes.
std::string trend_overlay_svg(const std::string& title, const std::vector<double>& time,
                              const std::vector<double>& estimate, const std::vector<double>& reference);

/// Reads a sweep output directory and writes table.csv plus SVG plots to `out`.
/// Returns the files written.
std::vector<fs::path> write_report(const fs::path& sweep_dir, const fs::path& out);

}  // namespace thermosig
