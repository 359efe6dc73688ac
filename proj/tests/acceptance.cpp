// Acceptance harness: one PASS/FAIL line per criterion. `--only <id>` runs a
// single criterion; exit status is 0 when everything run passed, 1 on a
// failure and 77 when the only criterion run was skipped.

#include "thermosig/cli.hpp"
#include "thermosig/config.hpp"
#include "thermosig/dsp.hpp"
#include "thermosig/eda.hpp"
#include "thermosig/io.hpp"
#include "thermosig/metrics.hpp"
#include "thermosig/sweep.hpp"
#include "thermosig/synthetic.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace thermosig;
namespace fs = std::filesystem;

namespace {

enum class Outcome { Pass, Fail, Skip };

struct Verdict {
  Outcome outcome = Outcome::Fail;
  std::string detail;
};

class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
    notes_.push_back(what);
  }
  void note(const std::string& what) { extra_.push_back(what); }
  Verdict verdict() const {
    std::string d;
    const auto& list = failures_.empty() ? notes_ : failures_;
    for (std::size_t i = 0; i < list.size(); ++i) d += (i ? "; " : "") + list[i];
    for (const auto& e : extra_) d += "; " + e;
    return {failures_.empty() ? Outcome::Pass : Outcome::Fail, failures_.empty() ? d : "failed: " + d};
  }

 private:
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
  std::vector<std::string> extra_;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path work_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("thermosig_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

SessionInput as_input(SyntheticSession g) {
  return {std::move(g.meta), std::move(g.traces), std::move(g.references)};
}

Series tone(Eigen::Index n, double f, double fs) {
  Series x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / fs);
  return x;
}

double rms(const Series& x) { return std::sqrt(x.array().square().mean()); }

// ---------------------------------------------------------------------------

Verdict breathing_rate() {
  const auto t0 = std::chrono::steady_clock::now();
  SyntheticSpec s;
  s.duration_s = 600.0;
  s.seed = 11;
  s.resp.bpm = RateProfile::constant(15.0);
  s.resp.bpm.modulation_bpm = 3.0;
  s.resp.bpm.modulation_period_s = 120.0;
  // 0 dB against the respiratory component of the nose trace
  s.noise.white_sigma = s.resp.amplitude * roi_mixing(RoiKind::Nose).resp / std::sqrt(2.0);
  const auto g = gen_session(s);
  const PipelineConfig pc;
  const auto traces = resample_traces(g.traces, pc);
  const auto est = estimate_br(traces, pc.br);
  const auto rep = rate_agreement(est, g.references.at("BR"), pc.min_rate_samples);
  const double elapsed = seconds_since(t0);
  Checks c;
  c.expect(rep.mae < 1.0, "BR MAE " + fmt(rep.mae) + " bpm < 1.0 over " + std::to_string(rep.n_valid) + " samples");
  c.expect(elapsed < 10.0, "runtime " + fmt(elapsed, 3) + " s < 10 s");
  return c.verdict();
}

SyntheticSpec hr_spec(double cardiac_scale) {
  SyntheticSpec s;
  s.duration_s = 600.0;
  s.seed = 21;
  s.eda.amplitude = 0.0;
  s.resp.amplitude = 0.0;
  s.artifact.freq_hz = 0.5;
  s.artifact.amplitude = 5.0;
  s.cardiac.bpm = RateProfile::constant(72.0);
  s.cardiac.amplitude = cardiac_scale * s.artifact.amplitude;
  s.noise.white_sigma = 0.05 * s.artifact.amplitude;
  return s;
}

Verdict heart_rate() {
  const PipelineConfig pc;
  Checks c;
  {
    const auto g = gen_session(hr_spec(0.1));
    const auto r = estimate_hr(resample_traces(g.traces, pc), pc.hr);
    c.expect(r.channels.size() == 4, std::to_string(r.channels.size()) + " channels fused");
    const auto rep = rate_agreement(r.estimate, g.references.at("HR"), pc.min_rate_samples);
    c.expect(rep.mae < 2.0, "HR MAE " + fmt(rep.mae) + " bpm < 2 (" + std::to_string(rep.n_valid) + " valid)");
  }
  {
    const auto g = gen_session(hr_spec(0.0));
    const auto r = estimate_hr(resample_traces(g.traces, pc), pc.hr);
    const double invalid =
        1.0 - static_cast<double>(r.estimate.valid_count()) / static_cast<double>(r.estimate.size());
    c.expect(invalid >= 0.8, "no-cardiac invalid fraction " + fmt(invalid, 3) + " >= 0.8");
  }
  return c.verdict();
}

Verdict eda_recovery() {
  SyntheticSpec s;
  s.duration_s = 600.0;
  s.seed = 31;
  s.eda.polarity = -1.0;
  // 0 dB: the trend has unit std times amplitude in the nose
  s.noise.white_sigma = s.eda.amplitude * roi_mixing(RoiKind::Nose).eda;
  const auto g = gen_session(s);
  const PipelineConfig pc;
  const auto traces = resample_traces(g.traces, pc);
  const auto nose = trace_for(traces, RoiKind::Nose).value();
  const ReferenceSignal& peda = g.references.at("PEDA");
  Checks c;
  double worst = 1.0;
  std::string all;
  for (const auto& p : enumerate_methods()) {
    const auto est = extract_eda_trend(nose, p, pc.eda_min_valid_s, pc.eda_max_bridge_s);
    const auto rep = eda_agreement(est, peda, pc.max_lag_s, pc.min_overlap_s);
    if (p.method == EdaMethod::ButterworthLp) {
      c.expect(rep.pcc_abs > 0.90, "butterworth pcc_abs " + fmt(rep.pcc_abs) + " > 0.90");
      c.expect(rep.polarity == Polarity::Negative, std::string("polarity ") + std::string(to_string(rep.polarity)));
    }
    worst = std::min(worst, rep.pcc_abs);
    all += (all.empty() ? "" : " ") + std::string(to_string(p.method)) + "=" + fmt(rep.pcc_abs, 3);
  }
  c.expect(worst > 0.75, "every method above 0.75 {" + all + "}");

  // The causal EMA lags by about half its span; its agreement on the clean
  // component alone bounds what any noise level can reach.
  RoiTrace clean = g.traces.front();
  clean.values = g.components.eda;
  const auto clean_est =
      extract_eda_trend(resample_traces({clean}, pc).front(), default_params(EdaMethod::ExpMovingAvg),
                        pc.eda_min_valid_s, pc.eda_max_bridge_s);
  const double ceiling = eda_agreement(clean_est, peda, pc.max_lag_s, pc.min_overlap_s).pcc_abs;
  c.note("noise-free ema pcc_abs " + fmt(ceiling, 3));
  return c.verdict();
}

Verdict lag_and_polarity() {
  Checks c;
  {
    SyntheticSpec s;
    s.duration_s = 1200.0;
    s.fps = 1.0;
    s.eda.band_limit_hz = 0.02;
    s.seed = 41;
    const Series x = gen_session(s).components.eda;
    const Eigen::Index n = 600, start = 300;
    std::string got;
    bool ok = true;
    for (int d : {-60, -15, 0, 15, 60}) {
      BiosignalEstimate est;
      est.rate_hz = 1.0;
      est.values = x.segment(start, n);
      est.valid = Mask::Constant(n, true);
      // the reference repeats the estimate d seconds later
      const auto ref = ReferenceSignal::uniform_grid("PEDA", "a.u.", x.segment(start - d, n), 1.0);
      const auto rep = eda_agreement(est, ref, 120.0, 120.0);
      ok = ok && std::abs(rep.tau_star_s - d) <= 1.0;
      got += (got.empty() ? "" : ",") + fmt(rep.tau_star_s);
    }
    c.expect(ok, "tau_star for d={-60,-15,0,15,60}: {" + got + "}");
  }
  {
    GaussianSource coin(42);
    std::vector<SessionInput> sessions;
    int positives = 0;
    for (std::uint64_t k = 0; k < 50; ++k) {
      SyntheticSpec s;
      s.duration_s = 300.0;
      s.seed = 1000 + k;
      s.noise.white_sigma = 5.0;
      s.eda.polarity = coin.uniform() <= 0.7 ? 1.0 : -1.0;
      positives += s.eda.polarity > 0;
      sessions.push_back(as_input(gen_session(s)));
    }
    RunConfig cfg;
    cfg.sweep.rois = {RoiKind::Nose};
    cfg.sweep.methods = {default_params(EdaMethod::ButterworthLp)};
    cfg.sweep.eda_references = {"PEDA"};
    cfg.sweep.rates = false;
    const auto res = run_sweep(sessions, cfg);
    const double census = polarity_census(res, RoiKind::Nose, EdaMethod::ButterworthLp, "PEDA");
    c.expect(std::abs(census - 0.7) <= 0.1, "polarity census " + fmt(census, 3) + " (" + std::to_string(positives) +
                                                "/50 embedded positive) within 0.7 +- 0.1");
  }
  return c.verdict();
}

Verdict filters() {
  Checks c;
  const RunConfig cfg;
  const PipelineConfig& pc = cfg.pipeline;
  const double fs = pc.pipeline_fps;

  std::vector<FilterDesign> designs;
  for (const auto& p : cfg.sweep.methods) {
    if (p.method == EdaMethod::ButterworthLp)
      designs.push_back(FilterDesign::lowpass(FilterFamily::Butterworth, p.filter_order, p.cutoff_hz, fs));
    if (p.method == EdaMethod::BesselLp)
      designs.push_back(FilterDesign::lowpass(FilterFamily::Bessel, p.filter_order, p.cutoff_hz, fs));
    if (p.method == EdaMethod::HilbertEnv) {
      designs.push_back(FilterDesign::bandpass(FilterFamily::Butterworth, p.envelope_band_order,
                                               p.envelope_band_low_hz, p.envelope_band_high_hz, fs));
      designs.push_back(FilterDesign::lowpass(FilterFamily::Butterworth, p.filter_order, p.cutoff_hz, fs));
    }
  }
  designs.push_back(FilterDesign::bandpass(FilterFamily::Butterworth, pc.hr.prefilter_order, pc.hr.prefilter_low_hz,
                                           pc.hr.prefilter_high_hz, fs));
  designs.push_back(FilterDesign::bandpass(FilterFamily::Butterworth, pc.hr.band_order, pc.hr.rate.band_low_hz,
                                           pc.hr.rate.band_high_hz, fs));
  designs.push_back(FilterDesign::bandpass(FilterFamily::Butterworth, pc.br.prefilter_order, pc.br.prefilter_low_hz,
                                           pc.br.prefilter_high_hz, fs));

  double worst_pole = 0.0, worst_gain_err = 0.0;
  for (const auto& d : designs) {
    const auto f = design_iir(d);
    worst_pole = std::max(worst_pole, f.max_pole_modulus());
    if (d.family == FilterFamily::Butterworth && d.kind == FilterKind::Lowpass)
      worst_gain_err = std::max(worst_gain_err, std::abs(f.magnitude(d.low_hz) - std::sqrt(0.5)));
    if (d.family == FilterFamily::Butterworth && d.kind == FilterKind::Bandpass) {
      worst_gain_err = std::max(worst_gain_err, std::abs(f.magnitude(d.low_hz) - std::sqrt(0.5)));
      worst_gain_err = std::max(worst_gain_err, std::abs(f.magnitude(d.high_hz) - std::sqrt(0.5)));
    }
  }
  c.expect(worst_pole < 1.0 - 1e-9, std::to_string(designs.size()) + " designs, max pole modulus " + fmt(worst_pole, 12));
  c.expect(worst_gain_err <= 1e-4, "Butterworth |H(fc)| error " + fmt(worst_gain_err, 3));

  {
    const auto bp = design_iir(designs[designs.size() - 2]);
    const Series x = tone(6000, 1.2, fs);
    const Series y = filtfilt(bp, x);
    const auto xc = xcorr_normalized(y.segment(1000, 4000), x.segment(1000, 4000), 10);
    c.expect(std::abs(xc.tau_star) <= 1, "in-band tone lag " + std::to_string(xc.tau_star) + " samples");
  }
  {
    const Eigen::Index n = 3000, w = 301;
    Series x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / 100.0;
      x[i] = 2.0 - 0.5 * t + 0.03 * t * t - 0.001 * t * t * t;
    }
    const Series y = savgol(x, w, 3);
    double rel = 0.0;
    for (Eigen::Index i = w / 2; i < n - w / 2; ++i)
      rel = std::max(rel, std::abs(y[i] - x[i]) / std::max(1.0, std::abs(x[i])));
    c.expect(rel <= 1e-6, "SavGol interior cubic error " + fmt(rel, 3));
  }
  {
    const Eigen::Index n = 18000;
    const Series k = Series::Constant(n, 7.25);
    const Series kc = dwt_approx(k, fs, 0.05);
    const double const_err = (kc - k).cwiseAbs().maxCoeff();
    Series ramp(n);
    for (Eigen::Index i = 0; i < n; ++i) ramp[i] = 0.01 * static_cast<double>(i) - 40.0;
    const Series rr = dwt_approx(ramp, fs, 0.05);
    const Eigen::Index m = 4000;
    const double ramp_err = (rr - ramp).segment(m, n - 2 * m).cwiseAbs().maxCoeff();
    c.expect(const_err <= 1e-6, "db4 constant error " + fmt(const_err, 3));
    c.expect(ramp_err <= 1e-6, "db4 ramp error " + fmt(ramp_err, 3) + " (interior)");
    const Series t1 = tone(n, 1.0, fs);
    const double ratio = rms(dwt_approx(t1, fs, 0.05)) / rms(t1);
    c.expect(ratio < 0.05, "db4 1 Hz tone RMS ratio " + fmt(ratio, 3));
  }
  return c.verdict();
}

Verdict spectral() {
  Checks c;
  {
    const double fs = 30.0;
    const Eigen::Index n = 4096;
    const double bin = fs / static_cast<double>(n);
    double worst = 0.0;
    for (double frac : {0.13, 0.27, 0.5, 0.71, 0.9}) {
      const double f = (200.0 + frac) * bin;
      const auto sp = welch_psd(tone(n, f, fs), fs, n, 0.0, n);
      const auto pk = parabolic_peak(sp, 0.5, 3.0);
      worst = std::max(worst, std::abs(pk.freq_hz - f) / bin);
    }
    c.expect(worst <= 0.02, "off-bin tone error " + fmt(worst, 3) + " bins");
  }
  {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      GaussianSource g(seed);
      const auto sp = welch_psd(g.normal(18000), 30.0, 512, 0.5, 512);
      std::vector<double> p(sp.power.data() + 1, sp.power.data() + sp.power.size() - 1);
      std::vector<double> sorted = p;
      std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(sorted.size() / 2), sorted.end());
      const double median = sorted[sorted.size() / 2];
      worst = std::max(worst, *std::max_element(p.begin(), p.end()) / median);
    }
    c.expect(worst < 10.0, "Welch white-noise max/median " + fmt(worst, 3) + " over 20 seeds");
  }
  return c.verdict();
}

int cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

std::vector<std::pair<std::string, std::string>> tree_contents(const fs::path& root) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files.emplace_back(fs::relative(e.path(), root).string(), read_text(e.path()));
  std::sort(files.begin(), files.end());
  return files;
}

Verdict sweep_structure() {
  Checks c;
  const auto dir = work_dir("sweep");
  for (int k = 1; k <= 3; ++k) {
    const std::string id = "syn" + std::to_string(k);
    const int code = cli({"synth", "--duration", "300", "--seed", std::to_string(k), "--noise", "2", "--session-id", id,
                          "--polarity", k == 2 ? "-1" : "1", "--out", (dir / "sessions" / id).string()});
    if (code != 0) {
      c.expect(false, "synth exit " + std::to_string(code));
      return c.verdict();
    }
  }
  for (const char* run : {"run1", "run2"}) {
    const int code = cli({"sweep", "--sessions", (dir / "sessions").string(), "--out", (dir / run).string()});
    if (code != 0) {
      c.expect(false, "sweep exit " + std::to_string(code));
      return c.verdict();
    }
  }
  const auto grid = load_grid(dir / "run1" / "grid.csv");
  std::map<std::pair<std::string, std::string>, std::size_t> per;
  std::size_t with_report = 0;
  for (const auto& g : grid) {
    ++per[{g.session_id, g.reference}];
    with_report += g.report ? 1 : 0;
  }
  bool all48 = !per.empty();
  for (const auto& [key, n] : per) all48 = all48 && n == 48;
  c.expect(all48 && per.size() == 3, std::to_string(per.size()) + " session/reference pairs with 48 cells each");
  c.expect(with_report == grid.size(), std::to_string(with_report) + "/" + std::to_string(grid.size()) + " cells evaluated");

  const auto summary = nlohmann::json::parse(read_text(dir / "run1" / "summary.json"));
  const double oracle = summary.at("oracle_summary").at(0).at("oracle_pcc_abs").at("mean").get<double>();
  double best_fixed = 0.0;
  for (const auto& s : summary.at("summaries"))
    if (s.at("group_by") == "all") best_fixed = std::max(best_fixed, s.at("pcc_abs").at("mean").get<double>());
  c.expect(oracle >= best_fixed, "oracle mean " + fmt(oracle) + " >= best fixed mean " + fmt(best_fixed));

  const auto a = tree_contents(dir / "run1");
  const auto b = tree_contents(dir / "run2");
  c.expect(a == b, std::to_string(a.size()) + " output files byte-identical across runs");
  return c.verdict();
}

Verdict frame_round_trip() {
  Checks c;
  SyntheticSpec s;
  s.duration_s = 120.0;
  s.seed = 81;
  const auto g = gen_session(s);
  const auto rendered = render_frames(g.traces);
  PipelineConfig pc;
  for (RoiKind k : kGeometryRois) pc.aggregations[k] = AggregationKind::mean();
  const auto back = extract_session_traces(rendered.frames, rendered.landmarks,
                                           {kGeometryRois.begin(), kGeometryRois.end()}, pc);
  double worst = 1.0;
  for (std::size_t k = 0; k < kGeometryRois.size(); ++k) {
    const auto t = trace_for(back, kGeometryRois[k]).value();
    const Eigen::ArrayXd a = t.values.array() - t.values.mean();
    const Eigen::ArrayXd b = g.traces[k].values.array() - g.traces[k].values.mean();
    worst = std::min(worst, (a * b).sum() / std::sqrt(a.square().sum() * b.square().sum()));
  }
  c.expect(worst > 0.99, "lowest per-ROI correlation " + fmt(worst, 6));
  return c.verdict();
}

Verdict dataset() {
  const char* root = std::getenv("THERMOSIG_DATASET_DIR");
  if (root == nullptr || !fs::is_directory(root))
    return {Outcome::Skip, "THERMOSIG_DATASET_DIR not set to a directory of converted sessions"};
  Checks c;
  RunConfig cfg = default_run_config();
  const auto dirs = find_sessions(root);
  const auto res = run_sweep(dirs, cfg);
  const auto out = work_dir("dataset");
  write_sweep(out, res, cfg);
  bool peda = false, pp_nr = false;
  double nose_ema = std::nan("");
  for (const auto& s : res.summaries) {
    if (s.group_by != "all") continue;
    peda = peda || (s.reference == "PEDA" && s.pcc_abs.n > 0);
    pp_nr = pp_nr || (s.reference == "PP_NR" && s.pcc_abs.n > 0);
    if (s.reference == "PEDA" && s.roi == RoiKind::Nose && s.method == EdaMethod::ExpMovingAvg)
      nose_ema = s.pcc_abs.mean;
  }
  c.expect(true, std::to_string(dirs.size()) + " sessions swept");
  c.expect(peda && pp_nr, "summary rows against PEDA and PP_NR");
  c.expect(std::abs(nose_ema - 0.40) <= 0.15, "nose/ema pcc_abs vs PEDA " + fmt(nose_ema, 3) + " within 0.40 +- 0.15");
  return c.verdict();
}

SyntheticSpec paper_length_spec(std::uint64_t seed) {
  SyntheticSpec s;
  s.duration_s = 642.0;
  s.seed = seed;
  s.noise.white_sigma = 1.0;
  return s;
}

Verdict runtime() {
  Checks c;
  RunConfig cfg;
  cfg.parallel = 1;
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = run_sweep(std::vector<SessionInput>{as_input(gen_session(paper_length_spec(101)))}, cfg);
  const double elapsed = seconds_since(t0);
  std::size_t cells = 0;
  for (const auto& g : res.grid) cells += g.report ? 1 : 0;
  c.expect(cells == 48 && res.rates.size() == 2, std::to_string(cells) + " EDA cells and " +
                                                     std::to_string(res.rates.size()) + " rate cells");
  c.expect(elapsed < 60.0, "10.7-minute session in " + fmt(elapsed, 3) + " s single-threaded");
  return c.verdict();
}

Verdict speedup() {
  Checks c;
  std::vector<SessionInput> sessions;
  for (std::uint64_t k = 0; k < 8; ++k) sessions.push_back(as_input(gen_session(paper_length_spec(200 + k))));
  RunConfig serial;
  serial.parallel = 1;
  RunConfig wide = serial;
  wide.parallel = 8;
  auto t0 = std::chrono::steady_clock::now();
  const auto a = run_sweep(sessions, serial);
  const double t_serial = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  const auto b = run_sweep(sessions, wide);
  const double t_wide = seconds_since(t0);
  bool same = a.grid.size() == b.grid.size();
  for (std::size_t i = 0; same && i < a.grid.size(); ++i)
    same = a.grid[i].report.has_value() == b.grid[i].report.has_value() &&
           (!a.grid[i].report || a.grid[i].report->pcc_abs == b.grid[i].report->pcc_abs);
  const double sp = t_serial / t_wide;
  c.expect(same, "8-thread results identical to serial");
  c.expect(sp >= 4.0, "speedup " + fmt(sp, 3) + "x (" + fmt(t_serial, 3) + " s / " + fmt(t_wide, 3) + " s) on " +
                          std::to_string(std::thread::hardware_concurrency()) + " hardware threads, need >= 4x");
  return c.verdict();
}

struct Criterion {
  std::string id;
  std::string title;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"1", "synthetic breathing rate", breathing_rate},
      {"2", "synthetic heart rate via OMIT", heart_rate},
      {"3", "synthetic EDA recovery", eda_recovery},
      {"4", "lag and polarity analytics", lag_and_polarity},
      {"5", "filter correctness", filters},
      {"6", "spectral estimation", spectral},
      {"7", "sweep reproducibility and structure", sweep_structure},
      {"8", "frame round-trip", frame_round_trip},
      {"9", "dataset track", dataset},
      {"10a", "single-session runtime", runtime},
      {"10b", "parallel speedup", speedup},
  };

  std::string only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--only <criterion>]\n";
      return 2;
    }
  }

  int ran = 0, failed = 0, skipped = 0;
  for (const auto& cr : criteria) {
    if (!only.empty() && cr.id != only) continue;
    ++ran;
    Verdict v;
    try {
      v = cr.run();
    } catch (const std::exception& e) {
      v = {Outcome::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = v.outcome == Outcome::Pass ? "PASS" : v.outcome == Outcome::Fail ? "FAIL" : "SKIP";
    std::cout << "criterion " << cr.id << " (" << cr.title << "): " << tag << ": " << v.detail << std::endl;
    failed += v.outcome == Outcome::Fail;
    skipped += v.outcome == Outcome::Skip;
  }
  if (ran == 0) {
    std::cerr << "unknown criterion '" << only << "'\n";
    return 2;
  }
  if (failed > 0) return 1;
  return skipped == ran ? 77 : 0;
}
