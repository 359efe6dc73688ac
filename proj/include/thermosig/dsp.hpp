#pragma once

#include "thermosig/core.hpp"

#include <array>
#include <complex>
#include <vector>

namespace thermosig {

// ---------------------------------------------------------------------------
// IIR design and zero-phase filtering
// ---------------------------------------------------------------------------

enum class FilterFamily { Butterworth, Bessel };
enum class FilterKind { Lowpass, Bandpass };

struct FilterDesign {
  FilterFamily family = FilterFamily::Butterworth;
  int order = 1;
  FilterKind kind = FilterKind::Lowpass;
  double low_hz = 0.0;   // cutoff for lowpass, lower edge for bandpass
  double high_hz = 0.0;  // upper edge for bandpass
  double fs = 1.0;

  static FilterDesign lowpass(FilterFamily family, int order, double cutoff_hz, double fs) {
    return {family, order, FilterKind::Lowpass, cutoff_hz, 0.0, fs};
  }
  static FilterDesign bandpass(FilterFamily family, int order, double low_hz, double high_hz, double fs) {
    return {family, order, FilterKind::Bandpass, low_hz, high_hz, fs};
  }
};

/// Second-order section; a[0] == 1. First-order sections have b[2] == a[2] == 0.
struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 3> a{1.0, 0.0, 0.0};
};

struct IirFilter {
  FilterDesign design;
  Eigen::VectorXd b;  // transfer-function form, a[0] == 1
  Eigen::VectorXd a;
  std::vector<Biquad> sections;  // what filtering actually runs on
  std::vector<std::complex<double>> zeros;
  std::vector<std::complex<double>> poles;
  double gain = 1.0;

  double max_pole_modulus() const;
  std::complex<double> response(double freq_hz) const;
  double magnitude(double freq_hz) const { return std::abs(response(freq_hz)); }
  /// Reflection length used by filtfilt: 3 * (max(len(a), len(b)) - 1).
  Eigen::Index pad_length() const;
};

/// Digital Butterworth or Bessel filter by bilinear transform of the analog
/// prototype with frequency pre-warping. Bessel prototypes are normalised so
/// the magnitude is -3 dB at the cutoff. Throws InvalidArgument for cutoffs
/// outside (0, fs/2), order < 1, or an unstable result.
IirFilter design_iir(const FilterDesign& design);

/// Forward-backward filtering with odd reflection padding and steady-state
/// initial conditions at both ends. Net phase is zero, magnitude is |H|^2.
/// Returns the mean of the forward-backward and backward-forward orders, so
/// filtering a reversed input gives the reversed output.
Series filtfilt(const IirFilter& filter, const Eigen::Ref<const Series>& x);

/// Single causal pass (initial state at rest).
Series sosfilt(const IirFilter& filter, const Eigen::Ref<const Series>& x);

// ---------------------------------------------------------------------------
// Smoothers
// ---------------------------------------------------------------------------

/// Odd window length for a duration: round(seconds * fs), bumped up when even.
Eigen::Index odd_window(double seconds, double fs);

/// Savitzky-Golay smoothing: local least-squares polynomial of `poly_order`
/// over `window` samples (even lengths are bumped up to odd). Near the ends
/// the window is truncated by the boundary and the fit is evaluated off-centre.
Series savgol(const Eigen::Ref<const Series>& x, Eigen::Index window, int poly_order);
Series savgol(const Eigen::Ref<const Series>& x, double window_s, int poly_order, double fs);

/// Central-window smoothing coefficients (length `window`) used away from the ends.
Series savgol_coefficients(Eigen::Index window, int poly_order);

/// Running median with an odd kernel; windows shrink symmetrically at the ends.
Series median_filter(const Eigen::Ref<const Series>& x, Eigen::Index kernel);

/// Centred boxcar mean; windows are truncated at the ends.
Series moving_average(const Eigen::Ref<const Series>& x, Eigen::Index window);

/// Causal exponential smoothing seeded with the first sample.
Series exponential_moving_average(const Eigen::Ref<const Series>& x, double alpha);

// ---------------------------------------------------------------------------
// Envelope and wavelets
// ---------------------------------------------------------------------------

/// |analytic signal| via one-sided spectral doubling. Requires >= 64 samples.
Series hilbert_envelope(const Eigen::Ref<const Series>& x);

/// Daubechies-4 (8-tap) decomposition low-pass filter.
const std::array<double, 8>& db4_lowpass();

struct DwtLevel {
  Series approx;
  Series detail;
};

/// One analysis level with half-sample symmetric extension; output length
/// floor((n + 7) / 2).
DwtLevel dwt_step(const Eigen::Ref<const Series>& x);
/// Inverse of dwt_step producing `n` samples.
Series idwt_step(const Eigen::Ref<const Series>& approx, const Eigen::Ref<const Series>& detail, Eigen::Index n);

/// Smallest L with fs / 2^(L+1) <= band_hz.
int wavelet_level(double fs, double band_hz);

/// Reconstruction from the level-L approximation alone (all details zeroed).
Series dwt_approx(const Eigen::Ref<const Series>& x, int level);
Series dwt_approx(const Eigen::Ref<const Series>& x, double fs, double target_band_hz = 0.05);

// ---------------------------------------------------------------------------
// Spectra and correlation
// ---------------------------------------------------------------------------

struct Spectrum {
  Series freqs;
  Series power;
  double resolution = 0.0;
};

/// Welch PSD: periodic Hann segments, per-segment mean removal, zero padding
/// to `nfft`, one-sided density (units^2 / Hz).
Spectrum welch_psd(const Eigen::Ref<const Series>& x, double fs, Eigen::Index seg_len, double overlap,
                   Eigen::Index nfft);

struct PeakEstimate {
  double freq_hz = 0.0;
  double power = 0.0;
  Eigen::Index bin = 0;
  bool refined = false;  // false at a band edge or for a degenerate parabola
};

/// Arg-max bin within [low_hz, high_hz] refined by a parabola through the
/// log-power of the neighbouring bins.
PeakEstimate parabolic_peak(const Spectrum& spectrum, double low_hz, double high_hz);

/// Peak power over median power within [low_hz, high_hz].
double peak_to_median_ratio(const Spectrum& spectrum, double low_hz, double high_hz);

struct XcorrResult {
  Series r;          // lags -max_lag..+max_lag
  int tau_star = 0;  // positive when `ref` lags `est`
  double r_max = 0.0;
  int max_lag = 0;
};

/// Normalised cross-correlation of standardised signals. Each lag uses the
/// overlapping region only, normalised by that region's energies. R(tau)
/// pairs est[i] with ref[i + tau].
XcorrResult xcorr_normalized(const Eigen::Ref<const Series>& est, const Eigen::Ref<const Series>& ref,
                             int max_lag);

}  // namespace thermosig
