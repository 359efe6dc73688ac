#include "thermosig/roi.hpp"

namespace thermosig {
namespace {

RoiRect centered_rect(RoiKind kind, double cx, double cy, double w, double h, int width, int height) {
  const int wi = static_cast<int>(std::round(w));
  const int hi = static_cast<int>(std::round(h));
  const int x0 = static_cast<int>(std::round(cx - w / 2.0));
  const int y0 = static_cast<int>(std::round(cy - h / 2.0));
  RoiRect r;
  r.roi = kind;
  const int cx0 = std::max(0, x0);
  const int cy0 = std::max(0, y0);
  const int cx1 = std::min(width, x0 + wi);
  const int cy1 = std::min(height, y0 + hi);
  if (cx1 - cx0 >= 1 && cy1 - cy0 >= 1) {
    r.x = cx0;
    r.y = cy0;
    r.w = cx1 - cx0;
    r.h = cy1 - cy0;
    r.valid = true;
  }
  return r;
}

}  // namespace

LandmarkTrack smooth_landmarks(const LandmarkTrack& track, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("smoothing alpha must be in (0, 1]");
  if (track.empty()) throw InvalidArgument("smooth_landmarks: empty track");

  std::vector<LandmarkFrame> out;
  out.reserve(track.size());
  out.push_back(track.entries().front());
  auto ema = [alpha](double x, double prev) { return alpha * x + (1.0 - alpha) * prev; };
  for (std::size_t i = 1; i < track.size(); ++i) {
    const auto& p = track.entries()[i];
    const auto& prev = out.back();
    LandmarkFrame s = p;
    s.confidence = ema(p.confidence, prev.confidence);
    s.bbox = {ema(p.bbox.x, prev.bbox.x), ema(p.bbox.y, prev.bbox.y), ema(p.bbox.w, prev.bbox.w),
              ema(p.bbox.h, prev.bbox.h)};
    for (std::size_t k = 0; k < s.points.size(); ++k)
      s.points[k] = alpha * p.points[k] + (1.0 - alpha) * prev.points[k];
    out.push_back(s);
  }
  return LandmarkTrack(std::move(out));
}

FrameRois derive_rois(const LandmarkFrame& lm, int width, int height, const RoiGeometry& g) {
  const double bw = lm.bbox.w;
  const double bh = lm.bbox.h;
  if (!(bw > 0.0 && bh > 0.0)) throw InvalidArgument("derive_rois: bbox must have positive area");

  const Eigen::Vector2d& eye_l = lm.point(Landmark::EyeL);
  const Eigen::Vector2d& eye_r = lm.point(Landmark::EyeR);
  const Eigen::Vector2d eye_mid = 0.5 * (eye_l + eye_r);

  FrameRois rois;
  const Eigen::Vector2d& nose = lm.point(Landmark::Nose);
  rois[0] = centered_rect(RoiKind::Nose, nose.x(), nose.y(), g.nose_w * bw, g.nose_h * bh, width, height);

  // shifting toward the other eye by shift*d moves shift*d toward the midline
  const Eigen::Vector2d peri_l = eye_l + g.canthus_shift * (eye_r - eye_l);
  const Eigen::Vector2d peri_r = eye_r + g.canthus_shift * (eye_l - eye_r);
  rois[1] = centered_rect(RoiKind::EyeL, peri_l.x(), peri_l.y(), g.eye_w * bw, g.eye_h * bh, width, height);
  rois[2] = centered_rect(RoiKind::EyeR, peri_r.x(), peri_r.y(), g.eye_w * bw, g.eye_h * bh, width, height);

  auto cheek_center = [&](const Eigen::Vector2d& eye, const Eigen::Vector2d& mouth) {
    Eigen::Vector2d c = 0.5 * (eye + mouth);
    const double side = eye.x() < eye_mid.x() ? -1.0 : eye.x() > eye_mid.x() ? 1.0 : 0.0;
    c.x() += side * g.cheek_lateral * bw;
    return c;
  };
  const Eigen::Vector2d cheek_l = cheek_center(eye_l, lm.point(Landmark::MouthL));
  const Eigen::Vector2d cheek_r = cheek_center(eye_r, lm.point(Landmark::MouthR));
  rois[3] = centered_rect(RoiKind::CheekL, cheek_l.x(), cheek_l.y(), g.cheek_w * bw, g.cheek_h * bh, width, height);
  rois[4] = centered_rect(RoiKind::CheekR, cheek_r.x(), cheek_r.y(), g.cheek_w * bw, g.cheek_h * bh, width, height);

  const double fh_h = g.forehead_h * bh;
  const double fh_cy = eye_mid.y() - g.forehead_gap * bh - fh_h / 2.0;
  rois[5] = centered_rect(RoiKind::Forehead, eye_mid.x(), fh_cy, g.forehead_w * bw, fh_h, width, height);
  return rois;
}

std::vector<FrameRois> track_rois(const LandmarkTrack& smoothed, std::size_t n_frames, int width,
                                  int height, double fps, double max_carry_s, const RoiGeometry& g) {
  FrameRois none;
  for (std::size_t k = 0; k < none.size(); ++k) none[k].roi = kGeometryRois[k];
  std::vector<FrameRois> out(n_frames, none);

  const auto max_carry = static_cast<std::int64_t>(std::floor(max_carry_s * fps + 1e-9));
  const auto& entries = smoothed.entries();
  std::size_t e = 0;
  const LandmarkFrame* last = nullptr;
  FrameRois last_rois = none;
  for (std::size_t f = 0; f < n_frames; ++f) {
    const auto fi = static_cast<std::int64_t>(f);
    while (e < entries.size() && entries[e].frame_idx < fi) ++e;
    if (e < entries.size() && entries[e].frame_idx == fi) {
      last = &entries[e];
      last_rois = derive_rois(*last, width, height, g);
      out[f] = last_rois;
    } else if (last != nullptr && fi - last->frame_idx <= max_carry) {
      out[f] = last_rois;
    }
  }
  return out;
}

double percentile_sorted(const std::vector<double>& sorted, double pct) {
  if (sorted.empty()) throw InvalidArgument("percentile of empty set");
  const double pos = std::clamp(pct, 0.0, 100.0) / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

}  // namespace thermosig
