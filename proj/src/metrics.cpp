#include "thermosig/metrics.hpp"

#include "thermosig/dsp.hpp"
#include "thermosig/resample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace thermosig {

std::string_view to_string(Polarity p) noexcept { return p == Polarity::Positive ? "positive" : "negative"; }

Polarity parse_polarity(std::string_view s) {
  if (s == "positive") return Polarity::Positive;
  if (s == "negative") return Polarity::Negative;
  throw InvalidArgument("unknown polarity '" + std::string(s) + "'");
}

double pearson(const Eigen::Ref<const Series>& a, const Eigen::Ref<const Series>& b) {
  if (a.size() != b.size()) throw InvalidArgument("pearson: length mismatch");
  if (a.size() < 2) throw TooFewSamples("pearson", 2, static_cast<std::size_t>(a.size()));
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  const double saa = da.square().sum();
  const double sbb = db.square().sum();
  if (!(saa > 0.0) || !(sbb > 0.0)) throw InvalidArgument("pearson: zero-variance input");
  return std::clamp((da * db).sum() / std::sqrt(saa * sbb), -1.0, 1.0);
}

Series average_ranks(const Eigen::Ref<const Series>& x) {
  const Eigen::Index n = x.size();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index i, Eigen::Index j) { return x[i] < x[j]; });
  Series ranks(n);
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && x[idx[static_cast<std::size_t>(j + 1)]] == x[idx[static_cast<std::size_t>(i)]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k) ranks[idx[static_cast<std::size_t>(k)]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(const Eigen::Ref<const Series>& a, const Eigen::Ref<const Series>& b) {
  return pearson(average_ranks(a), average_ranks(b));
}

namespace {

double population_std(const Eigen::Ref<const Series>& x) {
  return std::sqrt((x.array() - x.mean()).square().mean());
}

int sign_with_tolerance(double d, double eps) {
  if (std::abs(d) < eps) return 0;
  return d > 0.0 ? 1 : -1;
}

}  // namespace

double trend_agreement(const Eigen::Ref<const Series>& a, const Eigen::Ref<const Series>& b) {
  if (a.size() != b.size()) throw InvalidArgument("trend_agreement: length mismatch");
  if (a.size() < 2) throw TooFewSamples("trend_agreement", 2, static_cast<std::size_t>(a.size()));
  const double ea = 1e-9 * population_std(a);
  const double eb = 1e-9 * population_std(b);
  Eigen::Index agree = 0;
  for (Eigen::Index i = 1; i < a.size(); ++i)
    if (sign_with_tolerance(a[i] - a[i - 1], ea) == sign_with_tolerance(b[i] - b[i - 1], eb)) ++agree;
  return 100.0 * static_cast<double>(agree) / static_cast<double>(a.size() - 1);
}

AlignedPair align_to_estimate(const BiosignalEstimate& estimate, const ReferenceSignal& reference) {
  if (estimate.valid.size() != estimate.values.size()) throw InvalidArgument("estimate mask length mismatch");
  if (reference.time.size() < 2 || static_cast<Eigen::Index>(reference.time.size()) != reference.values.size())
    throw InvalidArgument("reference '" + reference.name + "' needs at least 2 timestamped samples");
  const Eigen::Index n = estimate.size();
  std::vector<double> t(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = estimate.time_at(i);
  Mask inside;
  const Series ref = interp_linear(reference.time, reference.values, t, &inside);

  AlignedPair out;
  out.timeline_in_span = inside.count();
  const Eigen::Index joint = (inside && estimate.valid).count();
  out.estimate.resize(joint);
  out.reference.resize(joint);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(inside[i] && estimate.valid[i])) continue;
    if (!std::isfinite(estimate.values[i])) throw NonFiniteValue(static_cast<std::size_t>(i));
    out.estimate[k] = estimate.values[i];
    out.reference[k] = ref[i];
    ++k;
  }
  return out;
}

AgreementReport eda_agreement(const BiosignalEstimate& estimate, const ReferenceSignal& reference, double max_lag_s,
                              double min_overlap_s) {
  const AlignedPair p = align_to_estimate(estimate, reference);
  const Eigen::Index n = p.estimate.size();
  const auto required = static_cast<std::size_t>(std::ceil(min_overlap_s * estimate.rate_hz - 1e-9));
  if (static_cast<std::size_t>(n) < std::max<std::size_t>(required, 2))
    throw TooFewSamples("eda_agreement overlap", std::max<std::size_t>(required, 2), static_cast<std::size_t>(n));

  AgreementReport r;
  r.n_overlap = n;
  r.pcc_signed = pearson(p.estimate, p.reference);
  r.pcc_abs = std::abs(r.pcc_signed);
  r.polarity = r.pcc_signed >= 0.0 ? Polarity::Positive : Polarity::Negative;
  r.spearman = spearman(p.estimate, p.reference);
  r.trend_agreement = trend_agreement(p.estimate, p.reference);

  const int max_lag = static_cast<int>(std::min<Eigen::Index>(
      static_cast<Eigen::Index>(std::llround(max_lag_s * estimate.rate_hz)), n / 2));
  const XcorrResult xc = xcorr_normalized(p.estimate, p.reference, max_lag);
  r.r_max = xc.r_max;
  r.tau_star_s = static_cast<double>(xc.tau_star) / estimate.rate_hz;
  return r;
}

RateAgreement rate_agreement(const BiosignalEstimate& estimate, const ReferenceSignal& reference,
                             Eigen::Index min_samples) {
  const AlignedPair p = align_to_estimate(estimate, reference);
  const Eigen::Index n = p.estimate.size();
  if (n < min_samples)
    throw TooFewSamples("rate_agreement aligned samples", static_cast<std::size_t>(min_samples),
                        static_cast<std::size_t>(n));
  RateAgreement r;
  r.n_valid = n;
  r.coverage = p.timeline_in_span > 0 ? static_cast<double>(n) / static_cast<double>(p.timeline_in_span) : 0.0;
  const Eigen::ArrayXd err = p.estimate.array() - p.reference.array();
  r.mae = err.abs().mean();
  r.rmse = std::sqrt(err.square().mean());
  r.bias = err.mean();
  try {
    r.pcc = pearson(p.estimate, p.reference);
  } catch (const InvalidArgument&) {
    r.pcc = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

}  // namespace thermosig
