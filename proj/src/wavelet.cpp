#include "thermosig/dsp.hpp"

#include <cmath>

namespace thermosig {
namespace {

constexpr Eigen::Index kTaps = 8;

// half-sample symmetric extension with period 2n
inline Eigen::Index sym_index(Eigen::Index m, Eigen::Index n) {
  const Eigen::Index period = 2 * n;
  m %= period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

const std::array<double, 8>& db4_highpass() {
  static const std::array<double, 8> g = [] {
    const auto& h = db4_lowpass();
    std::array<double, 8> out{};
    for (std::size_t k = 0; k < h.size(); ++k)
      out[k] = ((k % 2 == 0) ? -1.0 : 1.0) * h[h.size() - 1 - k];
    return out;
  }();
  return g;
}

Series analyze(const Eigen::Ref<const Series>& x, const std::array<double, 8>& filt) {
  const Eigen::Index n = x.size();
  const Eigen::Index len = (n + kTaps - 1) / 2;
  Series out(len);
  for (Eigen::Index o = 0; o < len; ++o) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < kTaps; ++j) acc += filt[static_cast<std::size_t>(j)] * x[sym_index(2 * o + 1 - j, n)];
    out[o] = acc;
  }
  return out;
}

// Adjoint of analyze restricted to [0, n): the coarse coefficients cover
// every position the filter touches, so together with the detail branch
// this reconstructs exactly.
void synthesize_add(const Eigen::Ref<const Series>& coef, const std::array<double, 8>& filt, Series& out) {
  const Eigen::Index n = out.size();
  const Eigen::Index len = coef.size();
  for (Eigen::Index m = 0; m < n; ++m) {
    double acc = 0.0;
    const Eigen::Index o_lo = m / 2;  // ceil((m - 1) / 2)
    const Eigen::Index o_hi = std::min<Eigen::Index>(len - 1, (m + kTaps - 2) / 2);
    for (Eigen::Index o = o_lo; o <= o_hi; ++o) {
      const Eigen::Index j = 2 * o + 1 - m;
      if (j >= 0 && j < kTaps) acc += coef[o] * filt[static_cast<std::size_t>(j)];
    }
    out[m] += acc;
  }
}

}  // namespace

const std::array<double, 8>& db4_lowpass() {
  static const std::array<double, 8> h = {
      -0.010597401784997278, 0.032883011666982945, 0.030841381835986965, -0.18703481171888114,
      -0.02798376941698385,  0.6308807679295904,   0.7148465705525415,   0.23037781330885523};
  return h;
}

DwtLevel dwt_step(const Eigen::Ref<const Series>& x) {
  if (x.size() < 2) throw TooFewSamples("dwt_step", 2, static_cast<std::size_t>(x.size()));
  return {analyze(x, db4_lowpass()), analyze(x, db4_highpass())};
}

Series idwt_step(const Eigen::Ref<const Series>& approx, const Eigen::Ref<const Series>& detail, Eigen::Index n) {
  if (approx.size() != detail.size()) throw InvalidArgument("idwt_step: coefficient length mismatch");
  if (approx.size() != (n + kTaps - 1) / 2) throw InvalidArgument("idwt_step: inconsistent output length");
  Series out = Series::Zero(n);
  synthesize_add(approx, db4_lowpass(), out);
  synthesize_add(detail, db4_highpass(), out);
  return out;
}

int wavelet_level(double fs, double band_hz) {
  if (!(fs > 0.0 && band_hz > 0.0)) throw InvalidArgument("wavelet_level: rates must be positive");
  int level = 0;
  while (fs / std::pow(2.0, level + 1) > band_hz) ++level;
  return level;
}

Series dwt_approx(const Eigen::Ref<const Series>& x, int level) {
  if (level < 0) throw InvalidArgument("wavelet level must be >= 0");
  const Eigen::Index required = Eigen::Index{1} << level;
  if (x.size() < required || x.size() < 2)
    throw TooFewSamples("dwt_approx level " + std::to_string(level), static_cast<std::size_t>(std::max<Eigen::Index>(required, 2)),
                        static_cast<std::size_t>(x.size()));
  std::vector<Eigen::Index> lengths;
  Series a = x;
  for (int l = 0; l < level; ++l) {
    lengths.push_back(a.size());
    a = analyze(a, db4_lowpass());
  }
  for (int l = level - 1; l >= 0; --l) {
    Series up = Series::Zero(lengths[static_cast<std::size_t>(l)]);
    synthesize_add(a, db4_lowpass(), up);
    a = std::move(up);
  }
  return a;
}

Series dwt_approx(const Eigen::Ref<const Series>& x, double fs, double target_band_hz) {
  return dwt_approx(x, wavelet_level(fs, target_band_hz));
}

}  // namespace thermosig
