#pragma once

#include "thermosig/core.hpp"

#include <string_view>

namespace thermosig {

enum class Polarity { Positive, Negative };
std::string_view to_string(Polarity p) noexcept;
Polarity parse_polarity(std::string_view s);

struct AgreementReport {
  double pcc_abs = 0.0;
  double pcc_signed = 0.0;
  double spearman = 0.0;
  double r_max = 0.0;
  double tau_star_s = 0.0;  // positive: reference lags the estimate
  double trend_agreement = 0.0;  // percent
  Polarity polarity = Polarity::Positive;
  Eigen::Index n_overlap = 0;
};

struct RateAgreement {
  double mae = 0.0;
  double rmse = 0.0;
  double pcc = 0.0;  // NaN when either side has zero variance
  double bias = 0.0;  // mean(estimate - reference)
  Eigen::Index n_valid = 0;
  double coverage = 0.0;
};

/// Pearson correlation; InvalidArgument on length mismatch or zero variance.
double pearson(const Eigen::Ref<const Series>& a, const Eigen::Ref<const Series>& b);

/// 1-based ranks, ties share their average rank.
Series average_ranks(const Eigen::Ref<const Series>& x);

double spearman(const Eigen::Ref<const Series>& a, const Eigen::Ref<const Series>& b);

/// Percent of consecutive steps whose first differences have the same sign.
/// Steps smaller than 1e-9 of a signal's std count as sign zero.
double trend_agreement(const Eigen::Ref<const Series>& a, const Eigen::Ref<const Series>& b);

/// Estimate and reference on the estimate's timeline, restricted to samples
/// where the estimate is valid and the reference is defined.
struct AlignedPair {
  Series estimate;
  Series reference;
  Eigen::Index timeline_in_span = 0;  // timeline samples inside the reference's time span
};

AlignedPair align_to_estimate(const BiosignalEstimate& estimate, const ReferenceSignal& reference);

/// Trend agreement over the jointly valid samples (concatenated). The lag
/// search covers +-max_lag_s, capped at half the overlap.
AgreementReport eda_agreement(const BiosignalEstimate& estimate, const ReferenceSignal& reference,
                              double max_lag_s = 120.0, double min_overlap_s = 120.0);

/// Rate agreement; TooFewSamples (carrying the valid count) below `min_samples`.
RateAgreement rate_agreement(const BiosignalEstimate& estimate, const ReferenceSignal& reference,
                             Eigen::Index min_samples = 30);

}  // namespace thermosig
