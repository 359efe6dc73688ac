#include "thermosig/sweep.hpp"

#include "thermosig/resample.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <set>
#include <thread>

namespace thermosig {

using nlohmann::json;

std::vector<RoiTrace> extract_session_traces(const ThermalFrameSequence& frames, const LandmarkTrack& landmarks,
                                             const std::vector<RoiKind>& requested, const PipelineConfig& cfg) {
  const LandmarkTrack smoothed = smooth_landmarks(landmarks, cfg.landmark_alpha);
  const auto rois = track_rois(smoothed, frames.size(), frames.width(), frames.height(), frames.fps(), cfg.max_carry_s,
                               cfg.geometry);
  std::vector<RoiKind> geometry;
  for (RoiKind r : requested) {
    if (is_derived(r)) {
      for (RoiKind m : derived_members(r))
        if (std::find(geometry.begin(), geometry.end(), m) == geometry.end()) geometry.push_back(m);
    } else if (std::find(geometry.begin(), geometry.end(), r) == geometry.end()) {
      geometry.push_back(r);
    }
  }
  const auto base = extract_traces(frames, rois, geometry, cfg.aggregations);
  std::vector<RoiTrace> out;
  for (RoiKind r : requested)
    if (auto t = trace_for(base, r)) out.push_back(std::move(*t));
  return out;
}

std::vector<RoiTrace> resample_traces(const std::vector<RoiTrace>& traces, const PipelineConfig& cfg) {
  std::vector<RoiTrace> out;
  out.reserve(traces.size());
  for (const auto& t : traces) {
    t.validate();
    if (std::abs(t.fps - cfg.pipeline_fps) < 1e-12) {
      out.push_back(t);
      continue;
    }
    const SampledSeries s{t.values, t.valid, t.fps, 0.0};
    const SampledSeries r = resample_to_timeline(s, cfg.pipeline_fps, InterpMethod::CubicSpline, cfg.resample_max_gap_s);
    RoiTrace o = t;
    o.fps = cfg.pipeline_fps;
    o.values = r.values;
    o.valid = r.valid;
    out.push_back(std::move(o));
  }
  return out;
}

std::optional<RoiTrace> trace_for(const std::vector<RoiTrace>& traces, RoiKind roi) {
  for (const auto& t : traces)
    if (t.roi == roi) return t;
  if (!is_derived(roi)) return std::nullopt;
  const auto members = derived_members(roi);
  auto a = trace_for(traces, members[0]);
  auto b = trace_for(traces, members[1]);
  if (!a || !b) return std::nullopt;
  return combine_traces(roi, *a, *b);
}

SessionInput to_session_input(const SessionBundle& bundle, const PipelineConfig& cfg) {
  SessionInput in;
  in.meta = bundle.meta;
  in.references = bundle.references;
  if (!bundle.traces.empty()) {
    in.traces = bundle.traces;
  } else if (bundle.frames && bundle.landmarks) {
    in.traces = extract_session_traces(*bundle.frames, *bundle.landmarks,
                                       std::vector<RoiKind>(kGeometryRois.begin(), kGeometryRois.end()), cfg);
  } else {
    throw InvalidArgument("session '" + bundle.meta.session_id + "' has neither traces nor frames with landmarks");
  }
  return in;
}

MetricStats summarize(const std::vector<double>& values) {
  MetricStats s;
  s.n = values.size();
  if (values.empty()) {
    s.mean = s.std = std::nan("");
    return s;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(values.size()));
  return s;
}

namespace {

std::string describe_failure(const std::exception& e, bool input_error) {
  std::string msg = (input_error ? "" : "internal: ") + std::string(e.what());
  for (char& c : msg)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return msg;
}

struct SessionOutcome {
  std::vector<EdaCell> grid;
  std::vector<RateCell> rates;
  std::vector<TrendOverlay> overlays;
};

template <typename Fn>
std::string capture_error(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return describe_failure(e, true);
  } catch (const std::exception& e) {
    return describe_failure(e, false);
  }
  return {};
}

SessionOutcome process_session(const SessionInput& in, const RunConfig& cfg) {
  SessionOutcome out;
  const SweepGrid& grid = cfg.sweep;
  const PipelineConfig& pc = cfg.pipeline;

  std::vector<RoiTrace> traces;
  const std::string prep_error = capture_error([&] { traces = resample_traces(in.traces, pc); });

  std::vector<const ReferenceSignal*> refs;
  for (const auto& name : grid.eda_references) {
    const auto it = in.references.find(name);
    refs.push_back(it == in.references.end() ? nullptr : &it->second);
  }

  // trends[roi][method]
  std::vector<std::vector<std::optional<BiosignalEstimate>>> trends(grid.rois.size());
  std::vector<std::vector<std::string>> trend_errors(grid.rois.size());
  for (std::size_t r = 0; r < grid.rois.size(); ++r) {
    trends[r].resize(grid.methods.size());
    trend_errors[r].resize(grid.methods.size());
    std::optional<RoiTrace> trace;
    std::string roi_error = prep_error;
    if (roi_error.empty()) {
      roi_error = capture_error([&] { trace = trace_for(traces, grid.rois[r]); });
      if (roi_error.empty() && !trace) roi_error = "missing trace for ROI " + std::string(to_string(grid.rois[r]));
    }
    for (std::size_t m = 0; m < grid.methods.size(); ++m) {
      if (!roi_error.empty()) {
        trend_errors[r][m] = roi_error;
        continue;
      }
      trend_errors[r][m] = capture_error([&] {
        trends[r][m] = extract_eda_trend(*trace, grid.methods[m], pc.eda_min_valid_s, pc.eda_max_bridge_s);
      });
    }
  }

  for (std::size_t k = 0; k < refs.size(); ++k) {
    if (refs[k] == nullptr) continue;
    const std::size_t first = out.grid.size();
    for (std::size_t r = 0; r < grid.rois.size(); ++r) {
      for (std::size_t m = 0; m < grid.methods.size(); ++m) {
        EdaCell cell;
        cell.session_id = in.meta.session_id;
        cell.roi = grid.rois[r];
        cell.method = grid.methods[m].method;
        cell.reference = grid.eda_references[k];
        if (!trend_errors[r][m].empty()) {
          cell.error = trend_errors[r][m];
        } else {
          AgreementReport rep;
          cell.error = capture_error([&] { rep = eda_agreement(*trends[r][m], *refs[k], pc.max_lag_s, pc.min_overlap_s); });
          if (cell.error.empty()) cell.report = rep;
        }
        out.grid.push_back(std::move(cell));
      }
    }

    // the oracle configuration's trend for overlays
    const EdaCell* best = nullptr;
    std::size_t best_idx = 0;
    for (std::size_t i = first; i < out.grid.size(); ++i) {
      const EdaCell& c = out.grid[i];
      if (c.report && (best == nullptr || c.report->pcc_abs > best->report->pcc_abs)) {
        best = &c;
        best_idx = i - first;
      }
    }
    if (best != nullptr) {
      const std::size_t r = best_idx / grid.methods.size();
      const std::size_t m = best_idx % grid.methods.size();
      const BiosignalEstimate& est = *trends[r][m];
      TrendOverlay ov;
      ov.session_id = in.meta.session_id;
      ov.reference = grid.eda_references[k];
      ov.roi = best->roi;
      ov.method = best->method;
      std::vector<double> t(static_cast<std::size_t>(est.size()));
      for (Eigen::Index i = 0; i < est.size(); ++i) t[static_cast<std::size_t>(i)] = est.time_at(i);
      Mask inside;
      const Series ref = interp_linear(refs[k]->time, refs[k]->values, t, &inside);
      for (Eigen::Index i = 0; i < est.size(); ++i) {
        if (!(est.valid[i] && inside[i])) continue;
        ov.time.push_back(t[static_cast<std::size_t>(i)]);
        ov.estimate.push_back(est.values[i]);
        ov.reference_values.push_back(ref[i]);
      }
      out.overlays.push_back(std::move(ov));
    }
  }

  if (grid.rates) {
    auto rate_cell = [&](BiosignalKind kind, const std::string& ref_name, auto&& estimator) {
      const auto it = in.references.find(ref_name);
      if (it == in.references.end()) return;
      RateCell cell;
      cell.session_id = in.meta.session_id;
      cell.kind = kind;
      cell.reference = ref_name;
      if (!prep_error.empty()) {
        cell.error = prep_error;
      } else {
        cell.error = capture_error([&] {
          const BiosignalEstimate est = estimator();
          cell.invalid_fraction =
              est.size() > 0 ? 1.0 - static_cast<double>(est.valid_count()) / static_cast<double>(est.size()) : 1.0;
          cell.report = rate_agreement(est, it->second, pc.min_rate_samples);
        });
      }
      out.rates.push_back(std::move(cell));
    };
    rate_cell(BiosignalKind::HeartRate, grid.hr_reference, [&] { return estimate_hr(traces, pc.hr).estimate; });
    rate_cell(BiosignalKind::BreathingRate, grid.br_reference, [&] { return estimate_br(traces, pc.br); });
  }
  return out;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

SweepResult reduce(std::vector<SessionOutcome> outcomes, const std::vector<SessionMeta>& metas, const RunConfig& cfg) {
  SweepResult res;
  std::set<std::string> seen;
  for (const auto& m : metas) {
    if (!seen.insert(m.session_id).second) throw InvalidArgument("duplicate session id '" + m.session_id + "' in sweep");
    res.sessions.push_back(m.session_id);
  }
  for (auto& o : outcomes) {
    res.grid.insert(res.grid.end(), o.grid.begin(), o.grid.end());
    res.rates.insert(res.rates.end(), o.rates.begin(), o.rates.end());
    res.overlays.insert(res.overlays.end(), o.overlays.begin(), o.overlays.end());
  }

  std::map<std::string, const SessionMeta*> meta_of;
  for (const auto& m : metas) meta_of[m.session_id] = &m;
  const std::vector<std::pair<std::string, std::function<std::string(const SessionMeta&)>>> groupings = {
      {"all", [](const SessionMeta&) { return std::string("all"); }},
      {"condition", [](const SessionMeta& m) { return m.condition_name(); }},
      {"subject", [](const SessionMeta& m) { return m.subject_id; }},
      {"sex", [](const SessionMeta& m) { return std::string(to_string(m.sex)); }},
      {"age_group", [](const SessionMeta& m) { return std::string(to_string(m.age_group)); }},
  };

  const SweepGrid& grid = cfg.sweep;
  for (const auto& [group_by, key_of] : groupings) {
    std::set<std::string> groups;
    for (const auto& m : metas) groups.insert(key_of(m));
    for (const auto& group : groups) {
      for (const auto& ref : grid.eda_references) {
        for (RoiKind roi : grid.rois) {
          for (const auto& params : grid.methods) {
            std::vector<double> pcc, sp, rmax, tau, trend;
            std::size_t errors = 0;
            bool any = false;
            for (const auto& c : res.grid) {
              if (c.reference != ref || c.roi != roi || c.method != params.method) continue;
              if (key_of(*meta_of.at(c.session_id)) != group) continue;
              any = true;
              if (!c.report) {
                ++errors;
                continue;
              }
              pcc.push_back(c.report->pcc_abs);
              sp.push_back(c.report->spearman);
              rmax.push_back(c.report->r_max);
              tau.push_back(c.report->tau_star_s);
              trend.push_back(c.report->trend_agreement);
            }
            if (!any) continue;
            CellSummary s;
            s.group_by = group_by;
            s.group = group;
            s.roi = roi;
            s.method = params.method;
            s.reference = ref;
            s.pcc_abs = summarize(pcc);
            s.spearman = summarize(sp);
            s.r_max = summarize(rmax);
            s.tau_star_s = summarize(tau);
            s.trend_agreement = summarize(trend);
            s.errors = errors;
            res.summaries.push_back(std::move(s));
          }
        }
      }
    }
  }

  for (const auto& ref : grid.eda_references) {
    std::vector<double> best_scores;
    for (const auto& sid : res.sessions) {
      const EdaCell* best = nullptr;
      for (const auto& c : res.grid)
        if (c.session_id == sid && c.reference == ref && c.report &&
            (best == nullptr || c.report->pcc_abs > best->report->pcc_abs))
          best = &c;
      if (best == nullptr) continue;
      res.oracle.push_back({sid, ref, best->roi, best->method, best->report->pcc_abs});
      best_scores.push_back(best->report->pcc_abs);
    }
    if (best_scores.empty()) continue;
    OracleSummary os;
    os.reference = ref;
    os.pcc_abs = summarize(best_scores);
    bool found = false;
    for (const auto& s : res.summaries) {
      if (s.group_by != "all" || s.reference != ref || s.pcc_abs.n == 0) continue;
      if (!found || s.pcc_abs.mean > os.best_fixed_mean) {
        os.best_fixed_mean = s.pcc_abs.mean;
        os.best_fixed_roi = s.roi;
        os.best_fixed_method = s.method;
        found = true;
      }
    }
    res.oracle_summary.push_back(os);
  }
  return res;
}

}  // namespace

SweepResult run_sweep(const std::vector<SessionInput>& sessions, const RunConfig& cfg) {
  if (sessions.empty()) throw InvalidArgument("run_sweep: no sessions");
  if (cfg.sweep.rois.empty() || cfg.sweep.methods.empty()) throw InvalidArgument("run_sweep: empty ROI or method list");
  std::vector<SessionOutcome> outcomes(sessions.size());
  parallel_for(sessions.size(), cfg.parallel, [&](std::size_t i) { outcomes[i] = process_session(sessions[i], cfg); });
  std::vector<SessionMeta> metas;
  for (const auto& s : sessions) metas.push_back(s.meta);
  return reduce(std::move(outcomes), metas, cfg);
}

SweepResult run_sweep(const std::vector<fs::path>& dirs, const RunConfig& cfg) {
  if (dirs.empty()) throw InvalidArgument("run_sweep: no sessions");
  if (cfg.sweep.rois.empty() || cfg.sweep.methods.empty()) throw InvalidArgument("run_sweep: empty ROI or method list");
  std::vector<SessionOutcome> outcomes(dirs.size());
  std::vector<SessionMeta> metas(dirs.size());
  parallel_for(dirs.size(), cfg.parallel, [&](std::size_t i) {
    const SessionInput in = to_session_input(load_session(dirs[i]), cfg.pipeline);
    metas[i] = in.meta;
    outcomes[i] = process_session(in, cfg);
  });
  return reduce(std::move(outcomes), metas, cfg);
}

double polarity_census(const SweepResult& result, RoiKind roi, EdaMethod method, const std::string& reference) {
  std::size_t total = 0, positive = 0;
  for (const auto& c : result.grid) {
    if (c.roi != roi || c.method != method || c.reference != reference || !c.report) continue;
    ++total;
    if (c.report->polarity == Polarity::Positive) ++positive;
  }
  if (total == 0)
    throw InvalidArgument("polarity_census: no evaluated cells for " + std::string(to_string(roi)) + "/" +
                          std::string(to_string(method)) + " against " + reference);
  return static_cast<double>(positive) / static_cast<double>(total);
}

namespace {

json stats_json(const MetricStats& s) { return {{"mean", s.mean}, {"std", s.std}, {"n", s.n}}; }

std::string file_token(std::string s) {
  for (char& c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  return s;
}

std::string num_or_empty(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

std::string provenance_json(const RunConfig& cfg, std::string_view command, const std::vector<std::string>& inputs) {
  const json j = {{"tool", "thermosig"},
                  {"version", THERMOSIG_VERSION},
                  {"command", std::string(command)},
                  {"config_hash", config_hash(cfg)},
                  {"seed", cfg.seed},
                  {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION)},
                  {"inputs", inputs}};
  return j.dump(2) + "\n";
}

void write_sweep(const fs::path& dir, const SweepResult& res, const RunConfig& cfg) {
  fs::create_directories(dir);
  std::string grid = "session_id,reference,roi,method,pcc_abs,pcc_signed,spearman,r_max,tau_star_s,trend_agreement,"
                     "polarity,n_overlap,error\n";
  for (const auto& c : res.grid) {
    grid += c.session_id + ',' + c.reference + ',' + std::string(to_string(c.roi)) + ',' +
            std::string(to_string(c.method)) + ',';
    if (c.report) {
      const auto& r = *c.report;
      grid += format_double(r.pcc_abs) + ',' + format_double(r.pcc_signed) + ',' + format_double(r.spearman) + ',' +
              format_double(r.r_max) + ',' + format_double(r.tau_star_s) + ',' + format_double(r.trend_agreement) +
              ',' + std::string(to_string(r.polarity)) + ',' + std::to_string(r.n_overlap) + ",\n";
    } else {
      grid += ",,,,,,,," + c.error + "\n";
    }
  }
  write_text(dir / "grid.csv", grid);

  std::string rates = "session_id,kind,reference,mae,rmse,pcc,bias,n_valid,coverage,invalid_fraction,error\n";
  for (const auto& c : res.rates) {
    rates += c.session_id + ',' + std::string(to_string(c.kind)) + ',' + c.reference + ',';
    if (c.report) {
      const auto& r = *c.report;
      rates += format_double(r.mae) + ',' + format_double(r.rmse) + ',' +
               num_or_empty(std::isnan(r.pcc) ? std::nullopt : std::optional<double>(r.pcc)) + ',' +
               format_double(r.bias) + ',' + std::to_string(r.n_valid) + ',' + format_double(r.coverage) + ',' +
               format_double(c.invalid_fraction) + ",\n";
    } else {
      rates += ",,,,,,," + c.error + "\n";
    }
  }
  write_text(dir / "rates.csv", rates);

  json summaries = json::array();
  for (const auto& s : res.summaries)
    summaries.push_back({{"group_by", s.group_by},
                         {"group", s.group},
                         {"reference", s.reference},
                         {"roi", std::string(to_string(s.roi))},
                         {"method", std::string(to_string(s.method))},
                         {"pcc_abs", stats_json(s.pcc_abs)},
                         {"spearman", stats_json(s.spearman)},
                         {"r_max", stats_json(s.r_max)},
                         {"tau_star_s", stats_json(s.tau_star_s)},
                         {"trend_agreement", stats_json(s.trend_agreement)},
                         {"errors", s.errors}});
  json oracle = json::array();
  for (const auto& o : res.oracle)
    oracle.push_back({{"session_id", o.session_id},
                      {"reference", o.reference},
                      {"roi", std::string(to_string(o.roi))},
                      {"method", std::string(to_string(o.method))},
                      {"pcc_abs", o.pcc_abs}});
  json oracle_summary = json::array();
  for (const auto& o : res.oracle_summary)
    oracle_summary.push_back({{"reference", o.reference},
                              {"oracle_pcc_abs", stats_json(o.pcc_abs)},
                              {"best_fixed_roi", std::string(to_string(o.best_fixed_roi))},
                              {"best_fixed_method", std::string(to_string(o.best_fixed_method))},
                              {"best_fixed_mean", o.best_fixed_mean}});
  json polarity = json::array();
  for (const auto& ref : cfg.sweep.eda_references)
    for (RoiKind roi : cfg.sweep.rois)
      for (const auto& m : cfg.sweep.methods) {
        try {
          polarity.push_back({{"reference", ref},
                              {"roi", std::string(to_string(roi))},
                              {"method", std::string(to_string(m.method))},
                              {"fraction_positive", polarity_census(res, roi, m.method, ref)}});
        } catch (const InvalidArgument&) {
        }
      }
  json rate_summary = json::object();
  for (BiosignalKind kind : {BiosignalKind::HeartRate, BiosignalKind::BreathingRate}) {
    std::vector<double> mae, rmse, bias, invalid;
    std::size_t errors = 0;
    for (const auto& c : res.rates) {
      if (c.kind != kind) continue;
      if (!c.report) {
        ++errors;
        continue;
      }
      mae.push_back(c.report->mae);
      rmse.push_back(c.report->rmse);
      bias.push_back(c.report->bias);
      invalid.push_back(c.invalid_fraction);
    }
    rate_summary[std::string(to_string(kind))] = {{"mae", stats_json(summarize(mae))},
                                                  {"rmse", stats_json(summarize(rmse))},
                                                  {"bias", stats_json(summarize(bias))},
                                                  {"invalid_fraction", stats_json(summarize(invalid))},
                                                  {"errors", errors}};
  }
  const json summary = {{"sessions", res.sessions},     {"summaries", summaries},
                        {"oracle", oracle},             {"oracle_summary", oracle_summary},
                        {"polarity", polarity},         {"rates", rate_summary}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");

  for (const auto& ov : res.overlays) {
    std::string text = "time_s,estimate,reference\n";
    for (std::size_t i = 0; i < ov.time.size(); ++i)
      text += format_double(ov.time[i]) + ',' + format_double(ov.estimate[i]) + ',' +
              format_double(ov.reference_values[i]) + '\n';
    write_text(dir / "trends" /
                   (file_token(ov.session_id) + "__" + file_token(ov.reference) + "__" +
                    std::string(to_string(ov.roi)) + "__" + std::string(to_string(ov.method)) + ".csv"),
               text);
  }
  write_text(dir / "provenance.json", provenance_json(cfg, "sweep", res.sessions));
}

std::vector<EdaCell> load_grid(const fs::path& grid_csv) {
  const std::string text = read_text(grid_csv);
  std::vector<EdaCell> cells;
  std::size_t pos = text.find('\n');
  if (pos == std::string::npos) throw ParseError(grid_csv.string() + ": empty grid");
  std::size_t row = 0;
  while (++pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string line = text.substr(pos, end - pos);
    pos = end;
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t s = 0;
    while (true) {
      const std::size_t c = line.find(',', s);
      f.push_back(line.substr(s, c == std::string::npos ? std::string::npos : c - s));
      if (c == std::string::npos) break;
      s = c + 1;
    }
    if (f.size() != 13) throw ParseError(grid_csv.string() + ": row " + std::to_string(row) + " has " +
                                         std::to_string(f.size()) + " fields, expected 13", row);
    EdaCell cell;
    cell.session_id = f[0];
    cell.reference = f[1];
    cell.roi = parse_roi(f[2]);
    cell.method = parse_eda_method(f[3]);
    if (!f[4].empty()) {
      auto num = [&](std::size_t k) {
        const auto v = parse_double(f[k]);
        if (!v) throw ParseError(grid_csv.string() + ": non-numeric value at row " + std::to_string(row), row);
        return *v;
      };
      AgreementReport r;
      r.pcc_abs = num(4);
      r.pcc_signed = num(5);
      r.spearman = num(6);
      r.r_max = num(7);
      r.tau_star_s = num(8);
      r.trend_agreement = num(9);
      r.polarity = parse_polarity(f[10]);
      r.n_overlap = static_cast<Eigen::Index>(num(11));
      cell.report = r;
    } else {
      cell.error = f[12];
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

}  // namespace thermosig
