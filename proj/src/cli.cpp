#include "thermosig/cli.hpp"

#include "thermosig/report.hpp"
#include "thermosig/sweep.hpp"
#include "thermosig/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>

namespace thermosig {
namespace {

using nlohmann::json;

struct GlobalOptions {
  std::string config;
  std::string out;
  std::optional<double> fps;
  std::optional<int> parallel;
  std::optional<std::uint64_t> seed;
};

RunConfig resolve_config(const GlobalOptions& g) {
  RunConfig cfg = g.config.empty() ? default_run_config() : load_run_config(g.config);
  if (!g.out.empty()) cfg.out_dir = g.out;
  if (g.parallel) {
    if (*g.parallel < 1) throw InvalidArgument("--parallel must be >= 1");
    cfg.parallel = *g.parallel;
  }
  if (g.seed) cfg.seed = *g.seed;
  return cfg;
}

/// Traces from --traces (needs an fps) or from a session directory.
struct TraceSource {
  std::string traces;
  std::string session;
};

std::vector<RoiTrace> load_trace_source(const TraceSource& src, const GlobalOptions& g, const RunConfig& cfg) {
  if (!src.traces.empty()) {
    if (!g.fps) throw InvalidArgument("--traces needs --fps");
    return load_traces(src.traces, *g.fps);
  }
  if (!src.session.empty()) {
    SessionBundle b = load_session(src.session);
    if (g.fps) b.fps = *g.fps;
    return to_session_input(b, cfg.pipeline).traces;
  }
  throw InvalidArgument("no input: give --traces <csv> or --session <dir> (frames need landmarks)");
}

void write_provenance(const RunConfig& cfg, std::string_view command, const std::vector<std::string>& inputs) {
  write_text(fs::path(cfg.out_dir) / "provenance.json", provenance_json(cfg, command, inputs));
}

json agreement_json(const AgreementReport& r) {
  return {{"pcc_abs", r.pcc_abs},       {"pcc_signed", r.pcc_signed},
          {"spearman", r.spearman},     {"r_max", r.r_max},
          {"tau_star_s", r.tau_star_s}, {"trend_agreement", r.trend_agreement},
          {"polarity", std::string(to_string(r.polarity))}, {"n_overlap", r.n_overlap}};
}

json rate_json(const RateAgreement& r) {
  return {{"mae", r.mae},         {"rmse", r.rmse},         {"pcc", r.pcc},
          {"bias", r.bias},       {"n_valid", r.n_valid},   {"coverage", r.coverage}};
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"thermosig: sudomotor, heart and breathing signals from thermal facial video", "thermosig"};
  app.set_version_flag("--version", std::string(THERMOSIG_VERSION));
  app.fallthrough();
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config, "run configuration JSON (default: $THERMOSIG_CONFIG or built-in)");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--fps", g.fps, "frame rate of frames/traces");
  app.add_option("--parallel", g.parallel, "worker threads for sweeps");
  app.add_option("--seed", g.seed, "random seed");

  // extract
  auto* extract = app.add_subcommand("extract", "ROI traces from frames and landmarks");
  std::string frames_path, landmarks_path;
  std::vector<std::string> extract_rois;
  extract->add_option("--frames", frames_path, "frame directory or raw file")->required();
  extract->add_option("--landmarks", landmarks_path, "landmarks CSV")->required();
  extract->add_option("--rois", extract_rois, "ROIs (default: the six geometry ROIs)");

  // eda / hr / br
  TraceSource eda_src, hr_src, br_src;
  std::string eda_roi = "nose";
  std::vector<std::string> eda_methods;
  auto* eda = app.add_subcommand("eda", "sudomotor trend at 1 Hz");
  eda->add_option("--traces", eda_src.traces, "traces CSV");
  eda->add_option("--session", eda_src.session, "session directory");
  eda->add_option("--roi", eda_roi, "ROI");
  eda->add_option("--method", eda_methods, "methods (default: all eight)");
  auto* hr = app.add_subcommand("hr", "heart rate track");
  hr->add_option("--traces", hr_src.traces, "traces CSV");
  hr->add_option("--session", hr_src.session, "session directory");
  auto* br = app.add_subcommand("br", "breathing rate track");
  br->add_option("--traces", br_src.traces, "traces CSV");
  br->add_option("--session", br_src.session, "session directory");

  // sweep
  std::string sessions_root;
  auto* sweep = app.add_subcommand("sweep", "ROI x method grid over sessions");
  sweep->add_option("--sessions", sessions_root, "session directory or a directory of sessions")->required();

  // eval
  std::string est_path, ref_path, kind_name = "eda";
  auto* eval = app.add_subcommand("eval", "agreement of one estimate with one reference");
  eval->add_option("--estimate", est_path, "estimate CSV (time_s,value[,valid])")->required();
  eval->add_option("--reference", ref_path, "reference CSV (time_s,value)")->required();
  eval->add_option("--kind", kind_name, "eda, hr or br")->check(CLI::IsMember({"eda", "hr", "br"}));

  // synth
  SyntheticSpec spec;
  bool synth_frames = false;
  std::string session_id, subject_id, condition, sex, age;
  double hr_bpm = 72.0, br_bpm = 15.0;
  auto* synth = app.add_subcommand("synth", "write a synthetic session");
  synth->add_option("--duration", spec.duration_s, "seconds (>= 60)");
  synth->add_option("--polarity", spec.eda.polarity, "EDA polarity, 1 or -1");
  synth->add_option("--eda-amplitude", spec.eda.amplitude, "counts");
  synth->add_option("--hr-bpm", hr_bpm, "constant heart rate");
  synth->add_option("--cardiac-amplitude", spec.cardiac.amplitude, "counts");
  synth->add_option("--br-bpm", br_bpm, "constant breathing rate");
  synth->add_option("--resp-amplitude", spec.resp.amplitude, "counts");
  synth->add_option("--artifact-amplitude", spec.artifact.amplitude, "counts");
  synth->add_option("--noise", spec.noise.white_sigma, "white noise sigma, counts");
  synth->add_option("--drift", spec.noise.drift, "random-walk step sigma, counts");
  synth->add_option("--jitter", spec.motion.jitter_px, "landmark jitter sigma, pixels");
  synth->add_flag("--frames", synth_frames, "also render 160x128 frames");
  synth->add_option("--session-id", session_id, "session id");
  synth->add_option("--subject", subject_id, "subject id");
  synth->add_option("--condition", condition, "condition label");
  synth->add_option("--sex", sex, "F or M");
  synth->add_option("--age", age, "young or older");

  // report
  std::string sweep_dir;
  auto* report = app.add_subcommand("report", "tables and SVG plots from a sweep directory");
  report->add_option("--sweep", sweep_dir, "sweep output directory")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << THERMOSIG_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    RunConfig cfg = resolve_config(g);
    if (*extract) {
      std::optional<double> fps = g.fps;
      const ThermalFrameSequence frames = load_frames(frames_path, fps);
      const LandmarkTrack lm = load_landmarks(landmarks_path);
      std::vector<RoiKind> rois;
      for (const auto& r : extract_rois) rois.push_back(parse_roi(r));
      if (rois.empty()) rois.assign(kGeometryRois.begin(), kGeometryRois.end());
      const auto traces = extract_session_traces(frames, lm, rois, cfg.pipeline);
      write_traces(fs::path(cfg.out_dir) / "traces.csv", traces);
      write_provenance(cfg, "extract", {frames_path, landmarks_path});
      out << "wrote " << (fs::path(cfg.out_dir) / "traces.csv").string() << " (" << frames.size() << " frames)\n";
    } else if (*eda) {
      const auto traces = resample_traces(load_trace_source(eda_src, g, cfg), cfg.pipeline);
      const RoiKind roi = parse_roi(eda_roi);
      const auto trace = trace_for(traces, roi);
      if (!trace) throw InvalidArgument("input has no '" + eda_roi + "' trace");
      std::vector<EdaParams> methods;
      for (const auto& m : eda_methods) methods.push_back(default_params(parse_eda_method(m)));
      if (methods.empty()) methods = cfg.sweep.methods;
      for (const auto& p : methods) {
        const auto est = extract_eda_trend(*trace, p, cfg.pipeline.eda_min_valid_s, cfg.pipeline.eda_max_bridge_s);
        const fs::path file = fs::path(cfg.out_dir) / ("eda_" + eda_roi + "_" + std::string(to_string(p.method)) + ".csv");
        write_estimate(file, est);
        out << "wrote " << file.string() << '\n';
      }
      write_provenance(cfg, "eda", {eda_src.traces.empty() ? eda_src.session : eda_src.traces});
    } else if (*hr || *br) {
      const TraceSource& src = *hr ? hr_src : br_src;
      const auto traces = resample_traces(load_trace_source(src, g, cfg), cfg.pipeline);
      BiosignalEstimate est;
      if (*hr) {
        const HrResult r = estimate_hr(traces, cfg.pipeline.hr);
        if (r.degraded) err << "warning: heart rate from " << r.channels.size() << " of 4 channels\n";
        est = r.estimate;
      } else {
        est = estimate_br(traces, cfg.pipeline.br);
      }
      const fs::path file = fs::path(cfg.out_dir) / (*hr ? "hr.csv" : "br.csv");
      write_estimate(file, est);
      write_provenance(cfg, *hr ? "hr" : "br", {src.traces.empty() ? src.session : src.traces});
      out << "wrote " << file.string() << " (" << est.valid_count() << "/" << est.size() << " valid)\n";
    } else if (*sweep) {
      const auto dirs = find_sessions(sessions_root);
      const SweepResult res = run_sweep(dirs, cfg);
      write_sweep(cfg.out_dir, res, cfg);
      std::size_t failed = 0;
      for (const auto& c : res.grid) failed += c.report ? 0 : 1;
      out << "sweep: " << res.sessions.size() << " sessions, " << res.grid.size() << " grid cells (" << failed
          << " failed) -> " << cfg.out_dir << '\n';
    } else if (*eval) {
      const BiosignalKind kind = parse_biosignal_kind(kind_name);
      const BiosignalEstimate est = load_estimate(est_path, kind);
      const ReferenceSignal ref = load_reference(ref_path, fs::path(ref_path).stem().string());
      json result;
      if (kind == BiosignalKind::EdaTrend)
        result = agreement_json(eda_agreement(est, ref, cfg.pipeline.max_lag_s, cfg.pipeline.min_overlap_s));
      else
        result = rate_json(rate_agreement(est, ref, cfg.pipeline.min_rate_samples));
      out << result.dump(2) << '\n';
      if (!g.out.empty()) {
        write_text(fs::path(cfg.out_dir) / "eval.json", result.dump(2) + "\n");
        write_provenance(cfg, "eval", {est_path, ref_path});
      }
    } else if (*synth) {
      spec.seed = cfg.seed;
      if (g.fps) spec.fps = *g.fps;
      spec.cardiac.bpm = RateProfile::constant(hr_bpm);
      spec.resp.bpm = RateProfile::constant(br_bpm);
      const SyntheticSession s = gen_session(spec);
      SessionBundle b;
      b.meta = s.meta;
      if (!session_id.empty()) b.meta.session_id = session_id;
      if (!subject_id.empty()) b.meta.subject_id = subject_id;
      if (!condition.empty()) {
        b.meta.condition_label = condition;
        b.meta.condition = parse_condition(condition);
      }
      if (!sex.empty()) b.meta.sex = parse_sex(sex);
      if (!age.empty()) b.meta.age_group = parse_age_group(age);
      b.fps = spec.fps;
      b.traces = s.traces;
      b.references = s.references;
      b.landmarks = s.landmarks;
      if (synth_frames) {
        RenderOptions ro;
        ro.seed = spec.seed;
        ro.landmark_jitter_px = spec.motion.jitter_px;
        RenderedSession r = render_frames(s.traces, ro);
        b.frames = std::move(r.frames);
        b.landmarks = std::move(r.landmarks);
      }
      write_session(cfg.out_dir, b);
      write_provenance(cfg, "synth", {});
      out << "wrote synthetic session " << b.meta.session_id << " to " << cfg.out_dir << '\n';
    } else if (*report) {
      const auto files = write_report(sweep_dir, cfg.out_dir);
      write_provenance(cfg, "report", {sweep_dir});
      out << "report: " << files.size() << " files in " << cfg.out_dir << '\n';
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace thermosig
