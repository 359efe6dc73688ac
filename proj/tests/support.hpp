#pragma once

#include "thermosig/core.hpp"
#include "thermosig/synthetic.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>

namespace tsupport {

using thermosig::Series;

inline Series tone(Eigen::Index n, double f, double fs, double amp = 1.0, double phase = 0.0) {
  Series x(n);
  for (Eigen::Index i = 0; i < n; ++i)
    x[i] = amp * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / fs + phase);
  return x;
}

inline Series white(Eigen::Index n, std::uint64_t seed, double sigma = 1.0) {
  thermosig::GaussianSource g(seed);
  return g.normal(n, sigma);
}

inline double rms(const Series& x) { return std::sqrt(x.array().square().mean()); }

inline double corr(const Series& a, const Series& b) {
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  return (da * db).sum() / std::sqrt(da.square().sum() * db.square().sum());
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("thermosig_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace tsupport
