#include "thermosig/synthetic.hpp"

#include "thermosig/dsp.hpp"
#include "thermosig/roi.hpp"

#include <cmath>
#include <numbers>

namespace thermosig {

double GaussianSource::uniform() {
  // 53 random bits mapped to (0, 1]
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double GaussianSource::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Series GaussianSource::normal(Eigen::Index n, double sigma) {
  Series out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = sigma * normal();
  return out;
}

double RateProfile::bpm_at(double t) const {
  if (points.empty()) throw InvalidArgument("rate profile has no points");
  double base = points.front().second;
  if (t >= points.back().first) {
    base = points.back().second;
  } else if (t > points.front().first) {
    for (std::size_t k = 1; k < points.size(); ++k) {
      if (t <= points[k].first) {
        const auto [t0, b0] = points[k - 1];
        const auto [t1, b1] = points[k];
        base = b0 + (b1 - b0) * (t - t0) / (t1 - t0);
        break;
      }
    }
  }
  if (modulation_bpm != 0.0) base += modulation_bpm * std::sin(2.0 * std::numbers::pi * t / modulation_period_s);
  return base;
}

void SyntheticSpec::validate() const {
  if (!(duration_s >= 60.0)) throw InvalidArgument("synthetic duration must be >= 60 s");
  if (!(fps > 0.0)) throw InvalidArgument("synthetic fps must be positive");
  if (eda.amplitude < 0 || cardiac.amplitude < 0 || resp.amplitude < 0 || artifact.amplitude < 0 ||
      noise.white_sigma < 0 || noise.drift < 0 || motion.jitter_px < 0)
    throw InvalidArgument("synthetic amplitudes and noise levels must be >= 0");
  if (std::abs(eda.polarity) != 1.0) throw InvalidArgument("EDA polarity must be +1 or -1");
  if (!(eda.band_limit_hz > 0.0 && eda.band_limit_hz * 0.6 < fps / 2.0))
    throw InvalidArgument("EDA band limit must lie below Nyquist");
  for (const RateProfile* p : {&cardiac.bpm, &resp.bpm}) {
    if (p->points.empty()) throw InvalidArgument("rate profile has no points");
    for (std::size_t k = 1; k < p->points.size(); ++k)
      if (!(p->points[k].first > p->points[k - 1].first)) throw InvalidArgument("rate profile times must increase");
    if (!(p->modulation_period_s > 0.0)) throw InvalidArgument("modulation period must be positive");
  }
}

RoiMixing roi_mixing(RoiKind roi) {
  switch (roi) {
    case RoiKind::Nose: return {1.0, 0.5, 3.0};
    case RoiKind::CheekL: return {0.8, 0.8, 1.0};
    case RoiKind::CheekR: return {0.8, 0.3, 1.0};
    case RoiKind::Forehead: return {0.7, 1.0, 0.0};
    case RoiKind::EyeL:
    case RoiKind::EyeR: return {0.5, 0.0, 0.0};
    default: throw InvalidArgument("roi_mixing: derived ROI kinds have no mixing");
  }
}

namespace {

// Phase of a tone whose frequency follows `profile`, by trapezoidal integration.
Series profile_phase(const RateProfile& profile, Eigen::Index n, double fs, Series& bpm) {
  bpm.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) bpm[i] = profile.bpm_at(static_cast<double>(i) / fs);
  Series phase(n);
  phase[0] = 0.0;
  for (Eigen::Index i = 1; i < n; ++i)
    phase[i] = phase[i - 1] + 2.0 * std::numbers::pi * (bpm[i - 1] + bpm[i]) / 120.0 / fs;
  return phase;
}

LandmarkFrame layout_in_box(double bx, double by, double bw, double bh) {
  LandmarkFrame lm;
  lm.confidence = 1.0;
  lm.bbox = {bx, by, bw, bh};
  auto at = [&](double u, double v) { return Eigen::Vector2d(bx + u * bw, by + v * bh); };
  lm.point(Landmark::EyeL) = at(0.25, 0.38);
  lm.point(Landmark::EyeR) = at(0.75, 0.38);
  lm.point(Landmark::Nose) = at(0.50, 0.60);
  lm.point(Landmark::MouthL) = at(0.35, 0.78);
  lm.point(Landmark::MouthR) = at(0.65, 0.78);
  return lm;
}

LandmarkTrack jittered_track(const LandmarkFrame& base, Eigen::Index n, double jitter, GaussianSource& rng) {
  std::vector<LandmarkFrame> entries(static_cast<std::size_t>(n), base);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& e = entries[static_cast<std::size_t>(i)];
    e.frame_idx = i;
    if (jitter > 0.0)
      for (auto& p : e.points) p += Eigen::Vector2d(jitter * rng.normal(), jitter * rng.normal());
  }
  return LandmarkTrack(std::move(entries));
}

}  // namespace

LandmarkFrame canonical_landmarks(int width, int height) {
  return layout_in_box(0.125 * width, 0.08 * height, 0.75 * width, 0.86 * height);
}

SyntheticSession gen_session(const SyntheticSpec& spec) {
  spec.validate();
  const double fs = spec.fps;
  const auto n = static_cast<Eigen::Index>(std::floor(spec.duration_s * fs + 1e-9));
  GaussianSource rng(spec.seed);

  SyntheticComponents c;
  {
    const Series white = rng.normal(n);
    const auto lp = design_iir(FilterDesign::lowpass(FilterFamily::Butterworth, 4, 0.6 * spec.eda.band_limit_hz, fs));
    Series e = filtfilt(lp, white);
    e.array() -= e.mean();
    e /= std::sqrt(e.array().square().mean());
    c.eda = e;
  }
  const Series phi_c = profile_phase(spec.cardiac.bpm, n, fs, c.hr_bpm);
  c.cardiac = phi_c.array().sin() + 0.3 * (2.0 * phi_c.array()).sin();
  const Series phi_r = profile_phase(spec.resp.bpm, n, fs, c.br_bpm);
  c.resp = phi_r.array().sin();
  c.artifact.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    c.artifact[i] = std::sin(2.0 * std::numbers::pi * spec.artifact.freq_hz * static_cast<double>(i) / fs);

  SyntheticSession s;
  s.meta.session_id = "synth-" + std::to_string(spec.seed);
  s.meta.subject_id = "synth";
  s.meta.condition = Condition::Other;
  s.meta.condition_label = "synthetic";

  for (RoiKind roi : kGeometryRois) {
    const RoiMixing w = roi_mixing(roi);
    RoiTrace t;
    t.roi = roi;
    t.aggregation = AggregationKind::mean();
    t.fps = fs;
    t.values = Series::Constant(n, spec.baseline) +
               spec.eda.polarity * spec.eda.amplitude * w.eda * c.eda +
               spec.cardiac.amplitude * w.cardiac * c.cardiac + spec.resp.amplitude * w.resp * c.resp +
               spec.artifact.amplitude * c.artifact;
    if (spec.noise.white_sigma > 0.0) t.values += rng.normal(n, spec.noise.white_sigma);
    if (spec.noise.drift > 0.0) {
      const Series steps = rng.normal(n, spec.noise.drift);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) t.values[i] += (acc += steps[i]);
    }
    t.valid = Mask::Constant(n, true);
    s.traces.push_back(std::move(t));
  }

  s.references["PEDA"] = ReferenceSignal::uniform_grid("PEDA", "a.u.", c.eda, fs);
  s.references["HR"] = ReferenceSignal::uniform_grid("HR", "bpm", c.hr_bpm, fs);
  s.references["BR"] = ReferenceSignal::uniform_grid("BR", "bpm", c.br_bpm, fs);
  s.landmarks = jittered_track(canonical_landmarks(160, 128), n, spec.motion.jitter_px, rng);
  s.components = std::move(c);
  return s;
}

RenderedSession render_frames(const std::vector<RoiTrace>& traces, const RenderOptions& opt) {
  if (traces.empty()) throw InvalidArgument("render_frames: no traces");
  const Eigen::Index n = traces.front().size();
  for (const auto& t : traces) {
    t.validate();
    if (is_derived(t.roi)) throw InvalidArgument("render_frames: derived ROI traces cannot be painted");
    if (t.size() != n || t.fps != traces.front().fps) throw InvalidArgument("render_frames: traces differ in length or rate");
  }
  if (opt.width < 32 || opt.height < 32)
    throw InvalidArgument("render_frames: frame " + std::to_string(opt.width) + "x" + std::to_string(opt.height) +
                          " is too small for the layout (minimum 32x32)");

  const LandmarkFrame base = canonical_landmarks(opt.width, opt.height);
  const FrameRois rects = derive_rois(base, opt.width, opt.height);
  for (const auto& r : rects)
    if (!r.valid || r.w < 2 || r.h < 2)
      throw InvalidArgument("render_frames: frame too small, " + std::string(to_string(r.roi)) + " region degenerates");

  double background = 0.0;
  if (opt.background) {
    background = *opt.background;
  } else {
    for (const auto& t : traces) background += t.values.sum();
    background /= static_cast<double>(traces.size() * static_cast<std::size_t>(n));
  }

  auto to_count = [](double v) {
    const double r = std::round(v);
    if (!(r >= 0.0 && r <= 65535.0))
      throw InvalidArgument("render_frames: value " + std::to_string(v) + " outside the 16-bit range");
    return static_cast<std::uint16_t>(r);
  };
  const std::uint16_t bg = to_count(background);

  GaussianSource rng(opt.seed);
  std::vector<RawFrame> frames;
  frames.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    RawFrame f = RawFrame::Constant(opt.height, opt.width, bg);
    for (const auto& t : traces) {
      const RoiRect* rect = nullptr;
      for (const auto& r : rects)
        if (r.roi == t.roi) rect = &r;
      const double v = t.valid[i] ? t.values[i] : background;
      for (int y = rect->y; y < rect->y + rect->h; ++y)
        for (int x = rect->x; x < rect->x + rect->w; ++x)
          f(y, x) = to_count(opt.pixel_noise_sigma > 0.0 ? v + opt.pixel_noise_sigma * rng.normal() : v);
    }
    frames.push_back(std::move(f));
  }

  RenderedSession out;
  out.frames = ThermalFrameSequence(std::move(frames), traces.front().fps);
  out.landmarks = jittered_track(base, n, opt.landmark_jitter_px, rng);
  return out;
}

}  // namespace thermosig
