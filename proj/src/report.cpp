#include "thermosig/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace thermosig {
namespace {

std::string fmt(double v, int decimals = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string svg_open(int w, int h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
         std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + ' ' + std::to_string(h) +
         "\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

// white -> dark blue
std::string shade(double v) {
  const double t = std::clamp(v, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(255 - 225 * t));
  const int g = static_cast<int>(std::lround(255 - 185 * t));
  const int b = static_cast<int>(std::lround(255 - 95 * t));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

template <typename T>
std::vector<T> in_first_seen_order(const std::vector<EdaCell>& grid, T EdaCell::*field) {
  std::vector<T> out;
  for (const auto& c : grid)
    if (std::find(out.begin(), out.end(), c.*field) == out.end()) out.push_back(c.*field);
  return out;
}

std::string polyline(const std::vector<double>& x, const std::vector<double>& y, const std::string& color) {
  std::string s = "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.2\" points=\"";
  for (std::size_t i = 0; i < x.size(); ++i) s += fmt(x[i], 1) + ',' + fmt(y[i], 1) + ' ';
  return s + "\"/>\n";
}

}  // namespace

std::string summary_table_csv(const std::vector<EdaCell>& grid) {
  const auto rois = in_first_seen_order(grid, &EdaCell::roi);
  const auto methods = in_first_seen_order(grid, &EdaCell::method);
  const auto refs = in_first_seen_order(grid, &EdaCell::reference);
  std::string out = "roi,method";
  for (const auto& r : refs) out += ',' + r + "_mean," + r + "_std," + r + "_n";
  out += '\n';
  for (RoiKind roi : rois) {
    for (EdaMethod m : methods) {
      out += std::string(to_string(roi)) + ',' + std::string(to_string(m));
      for (const auto& ref : refs) {
        std::vector<double> v;
        for (const auto& c : grid)
          if (c.roi == roi && c.method == m && c.reference == ref && c.report) v.push_back(c.report->pcc_abs);
        const MetricStats s = summarize(v);
        out += s.n ? ',' + format_double(s.mean) + ',' + format_double(s.std) + ',' + std::to_string(s.n)
                   : std::string(",,,0");
      }
      out += '\n';
    }
  }
  return out;
}

std::string heatmap_svg(const std::vector<EdaCell>& grid, const std::string& reference) {
  const auto rois = in_first_seen_order(grid, &EdaCell::roi);
  const auto methods = in_first_seen_order(grid, &EdaCell::method);
  const int cw = 84, ch = 30, left = 80, top = 50;
  const int w = left + cw * static_cast<int>(methods.size()) + 20;
  const int h = top + ch * static_cast<int>(rois.size()) + 30;
  std::string s = svg_open(w, h);
  s += "<text x=\"" + std::to_string(left) + "\" y=\"20\" font-size=\"13\">mean |PCC| vs " + escape(reference) +
       "</text>\n";
  for (std::size_t m = 0; m < methods.size(); ++m)
    s += "<text x=\"" + std::to_string(left + cw * static_cast<int>(m) + cw / 2) + "\" y=\"" + std::to_string(top - 6) +
         "\" text-anchor=\"middle\">" + std::string(to_string(methods[m])) + "</text>\n";
  for (std::size_t r = 0; r < rois.size(); ++r) {
    const int y = top + ch * static_cast<int>(r);
    s += "<text x=\"" + std::to_string(left - 6) + "\" y=\"" + std::to_string(y + ch / 2 + 4) +
         "\" text-anchor=\"end\">" + std::string(to_string(rois[r])) + "</text>\n";
    for (std::size_t m = 0; m < methods.size(); ++m) {
      std::vector<double> v;
      for (const auto& c : grid)
        if (c.roi == rois[r] && c.method == methods[m] && c.reference == reference && c.report)
          v.push_back(c.report->pcc_abs);
      const MetricStats st = summarize(v);
      const int x = left + cw * static_cast<int>(m);
      s += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) + "\" width=\"" + std::to_string(cw) +
           "\" height=\"" + std::to_string(ch) + "\" fill=\"" + (st.n ? shade(st.mean) : std::string("#dddddd")) +
           "\" stroke=\"white\"/>\n";
      const std::string label = st.n ? fmt(st.mean) + "±" + fmt(st.std) : "n/a";
      s += "<text x=\"" + std::to_string(x + cw / 2) + "\" y=\"" + std::to_string(y + ch / 2 + 4) +
           "\" text-anchor=\"middle\" fill=\"" + (st.n && st.mean > 0.6 ? "white" : "black") + "\">" + label +
           "</text>\n";
    }
  }
  return s + "</svg>\n";
}

std::string lag_histogram_svg(const std::vector<EdaCell>& grid, const std::string& reference, double bin_s) {
  if (!(bin_s > 0.0)) throw InvalidArgument("lag histogram bin width must be positive");
  const double lo = -120.0, hi = 120.0;
  const auto bins = static_cast<std::size_t>(std::ceil((hi - lo) / bin_s));
  std::vector<std::size_t> counts(bins, 0);
  std::size_t total = 0;
  for (const auto& c : grid) {
    if (c.reference != reference || !c.report) continue;
    const double t = std::clamp(c.report->tau_star_s, lo, hi);
    const auto k = std::min(bins - 1, static_cast<std::size_t>((t - lo) / bin_s));
    ++counts[k];
    ++total;
  }
  const std::size_t peak = std::max<std::size_t>(1, *std::max_element(counts.begin(), counts.end()));
  const int w = 520, h = 280, left = 50, bottom = 240, plot_w = 440, plot_h = 190;
  std::string s = svg_open(w, h);
  s += "<text x=\"" + std::to_string(left) + "\" y=\"20\" font-size=\"13\">tau* vs " + escape(reference) + " (n=" +
       std::to_string(total) + ")</text>\n";
  const double bw = static_cast<double>(plot_w) / static_cast<double>(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const double bh = plot_h * static_cast<double>(counts[k]) / static_cast<double>(peak);
    s += "<rect x=\"" + fmt(left + bw * static_cast<double>(k), 1) + "\" y=\"" + fmt(bottom - bh, 1) + "\" width=\"" +
         fmt(bw - 1, 1) + "\" height=\"" + fmt(bh, 1) + "\" fill=\"#4a6fa5\"/>\n";
  }
  s += "<line x1=\"" + std::to_string(left) + "\" y1=\"" + std::to_string(bottom) + "\" x2=\"" +
       std::to_string(left + plot_w) + "\" y2=\"" + std::to_string(bottom) + "\" stroke=\"black\"/>\n";
  for (double t = lo; t <= hi + 1e-9; t += 60.0)
    s += "<text x=\"" + fmt(left + plot_w * (t - lo) / (hi - lo), 1) + "\" y=\"" + std::to_string(bottom + 16) +
         "\" text-anchor=\"middle\">" + fmt(t, 0) + " s</text>\n";
  s += "<text x=\"" + std::to_string(left - 8) + "\" y=\"" + std::to_string(bottom - plot_h + 4) +
       "\" text-anchor=\"end\">" + std::to_string(peak) + "</text>\n";
  return s + "</svg>\n";
}

std::string trend_overlay_svg(const std::string& title, const std::vector<double>& time,
                              const std::vector<double>& estimate, const std::vector<double>& reference) {
  if (time.size() != estimate.size() || time.size() != reference.size())
    throw InvalidArgument("trend overlay: series lengths differ");
  const int w = 720, h = 260, left = 40, top = 30, plot_w = 660, plot_h = 200;
  std::string s = svg_open(w, h);
  s += "<text x=\"" + std::to_string(left) + "\" y=\"18\" font-size=\"13\">" + escape(title) + "</text>\n";
  if (time.size() < 2) return s + "</svg>\n";
  auto zscore = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double sd = std::sqrt(ss / static_cast<double>(v.size()));
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = sd > 0 ? (v[i] - m) / sd : 0.0;
    return out;
  };
  const auto e = zscore(estimate);
  const auto r = zscore(reference);
  double ymax = 1.0;
  for (std::size_t i = 0; i < e.size(); ++i) ymax = std::max({ymax, std::abs(e[i]), std::abs(r[i])});
  const double t0 = time.front(), t1 = time.back();
  std::vector<double> xs(time.size()), ye(time.size()), yr(time.size());
  for (std::size_t i = 0; i < time.size(); ++i) {
    xs[i] = left + plot_w * (time[i] - t0) / (t1 - t0);
    ye[i] = top + plot_h * (0.5 - 0.5 * e[i] / ymax);
    yr[i] = top + plot_h * (0.5 - 0.5 * r[i] / ymax);
  }
  s += "<rect x=\"" + std::to_string(left) + "\" y=\"" + std::to_string(top) + "\" width=\"" + std::to_string(plot_w) +
       "\" height=\"" + std::to_string(plot_h) + "\" fill=\"none\" stroke=\"#999999\"/>\n";
  s += polyline(xs, yr, "#222222");
  s += polyline(xs, ye, "#d0602a");
  s += "<text x=\"" + std::to_string(left + plot_w - 150) + "\" y=\"18\" fill=\"#222222\">reference</text>\n";
  s += "<text x=\"" + std::to_string(left + plot_w - 70) + "\" y=\"18\" fill=\"#d0602a\">estimate</text>\n";
  s += "<text x=\"" + std::to_string(left) + "\" y=\"" + std::to_string(top + plot_h + 16) + "\">" + fmt(t0, 0) +
       " s</text>\n";
  s += "<text x=\"" + std::to_string(left + plot_w) + "\" y=\"" + std::to_string(top + plot_h + 16) +
       "\" text-anchor=\"end\">" + fmt(t1, 0) + " s</text>\n";
  return s + "</svg>\n";
}

std::vector<fs::path> write_report(const fs::path& sweep_dir, const fs::path& out) {
  const auto grid = load_grid(sweep_dir / "grid.csv");
  std::vector<fs::path> written;
  auto emit = [&](const fs::path& p, const std::string& text) {
    write_text(p, text);
    written.push_back(p);
  };
  emit(out / "table.csv", summary_table_csv(grid));
  for (const auto& ref : in_first_seen_order(grid, &EdaCell::reference)) {
    emit(out / ("heatmap_" + ref + ".svg"), heatmap_svg(grid, ref));
    emit(out / ("lags_" + ref + ".svg"), lag_histogram_svg(grid, ref));
  }
  const fs::path trends = sweep_dir / "trends";
  if (fs::exists(trends)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(trends))
      if (e.path().extension() == ".csv") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::vector<double> t, e, r;
      std::istringstream in(read_text(f));
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) continue;
        const auto a = parse_double(line.substr(0, c1));
        const auto b = parse_double(line.substr(c1 + 1, c2 - c1 - 1));
        const auto c = parse_double(line.substr(c2 + 1));
        if (!a || !b || !c) throw ParseError(f.string() + ": malformed trend row");
        t.push_back(*a);
        e.push_back(*b);
        r.push_back(*c);
      }
      std::string title = f.stem().string();
      for (std::size_t p; (p = title.find("__")) != std::string::npos;) title.replace(p, 2, " / ");
      emit(out / ("overlay_" + f.stem().string() + ".svg"), trend_overlay_svg(title, t, e, r));
    }
  }
  return written;
}

}  // namespace thermosig
