#include "thermosig/config.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace thermosig {
namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  if (!j.is_object()) throw ParseError("config: '" + where + "' must be an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) throw ParseError("config: unknown key '" + item.key() + "' in '" + where + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

json rate_to_json(const RateEstimatorConfig& c) {
  return {{"band_low_hz", c.band_low_hz},     {"band_high_hz", c.band_high_hz},
          {"window_s", c.window_s},           {"step_s", c.step_s},
          {"valid_low_bpm", c.valid_low_bpm}, {"valid_high_bpm", c.valid_high_bpm},
          {"gap_max", c.gap_max},             {"median_len", c.median_len},
          {"apply_median", c.apply_median},   {"min_peak_ratio", c.min_peak_ratio},
          {"min_valid_fraction", c.min_valid_fraction}};
}

void rate_from_json(const json& j, RateEstimatorConfig& c, const std::string& where) {
  check_keys(j,
             {"band_low_hz", "band_high_hz", "window_s", "step_s", "valid_low_bpm", "valid_high_bpm", "gap_max",
              "median_len", "apply_median", "min_peak_ratio", "min_valid_fraction"},
             where);
  read(j, "band_low_hz", c.band_low_hz);
  read(j, "band_high_hz", c.band_high_hz);
  read(j, "window_s", c.window_s);
  read(j, "step_s", c.step_s);
  read(j, "valid_low_bpm", c.valid_low_bpm);
  read(j, "valid_high_bpm", c.valid_high_bpm);
  read(j, "gap_max", c.gap_max);
  read(j, "median_len", c.median_len);
  read(j, "apply_median", c.apply_median);
  read(j, "min_peak_ratio", c.min_peak_ratio);
  read(j, "min_valid_fraction", c.min_valid_fraction);
}

json method_to_json(const EdaParams& p) {
  return {{"method", std::string(to_string(p.method))},
          {"cutoff_hz", p.cutoff_hz},
          {"filter_order", p.filter_order},
          {"window_s", p.window_s},
          {"poly_order", p.poly_order},
          {"median_s", p.median_s},
          {"envelope_band_low_hz", p.envelope_band_low_hz},
          {"envelope_band_high_hz", p.envelope_band_high_hz},
          {"envelope_band_order", p.envelope_band_order},
          {"wavelet_band_hz", p.wavelet_band_hz}};
}

EdaParams method_from_json(const json& j) {
  if (j.is_string()) return default_params(parse_eda_method(j.get<std::string>()));
  check_keys(j,
             {"method", "cutoff_hz", "filter_order", "window_s", "poly_order", "median_s", "envelope_band_low_hz",
              "envelope_band_high_hz", "envelope_band_order", "wavelet_band_hz"},
             "sweep.methods[]");
  if (!j.contains("method")) throw ParseError("config: method entry without 'method'");
  EdaParams p = default_params(parse_eda_method(j.at("method").get<std::string>()));
  read(j, "cutoff_hz", p.cutoff_hz);
  read(j, "filter_order", p.filter_order);
  read(j, "window_s", p.window_s);
  read(j, "poly_order", p.poly_order);
  read(j, "median_s", p.median_s);
  read(j, "envelope_band_low_hz", p.envelope_band_low_hz);
  read(j, "envelope_band_high_hz", p.envelope_band_high_hz);
  read(j, "envelope_band_order", p.envelope_band_order);
  read(j, "wavelet_band_hz", p.wavelet_band_hz);
  return p;
}

json to_json(const RunConfig& cfg) {
  const PipelineConfig& p = cfg.pipeline;
  const RoiGeometry& g = p.geometry;
  json aggs = json::object();
  for (const auto& [roi, kind] : p.aggregations)
    aggs[std::string(to_string(roi))] = {{"type", to_string(kind)}, {"param", kind.param}};
  json pipeline = {
      {"pipeline_fps", p.pipeline_fps},
      {"landmark_alpha", p.landmark_alpha},
      {"max_carry_s", p.max_carry_s},
      {"geometry",
       {{"nose_w", g.nose_w}, {"nose_h", g.nose_h}, {"eye_w", g.eye_w}, {"eye_h", g.eye_h},
        {"cheek_w", g.cheek_w}, {"cheek_h", g.cheek_h}, {"forehead_w", g.forehead_w},
        {"forehead_h", g.forehead_h}, {"canthus_shift", g.canthus_shift}, {"cheek_lateral", g.cheek_lateral},
        {"forehead_gap", g.forehead_gap}}},
      {"aggregations", aggs},
      {"resample_max_gap_s", p.resample_max_gap_s},
      {"eda_min_valid_s", p.eda_min_valid_s},
      {"eda_max_bridge_s", p.eda_max_bridge_s},
      {"max_lag_s", p.max_lag_s},
      {"min_overlap_s", p.min_overlap_s},
      {"min_rate_samples", p.min_rate_samples},
      {"hr",
       {{"prefilter_low_hz", p.hr.prefilter_low_hz}, {"prefilter_high_hz", p.hr.prefilter_high_hz},
        {"prefilter_order", p.hr.prefilter_order}, {"band_order", p.hr.band_order},
        {"max_bridge_s", p.hr.max_bridge_s}, {"min_valid_s", p.hr.min_valid_s}, {"rate", rate_to_json(p.hr.rate)}}},
      {"br",
       {{"prefilter_low_hz", p.br.prefilter_low_hz}, {"prefilter_high_hz", p.br.prefilter_high_hz},
        {"prefilter_order", p.br.prefilter_order}, {"max_bridge_s", p.br.max_bridge_s},
        {"min_valid_s", p.br.min_valid_s}, {"rate", rate_to_json(p.br.rate)}}}};

  json rois = json::array();
  for (RoiKind r : cfg.sweep.rois) rois.push_back(std::string(to_string(r)));
  json methods = json::array();
  for (const auto& m : cfg.sweep.methods) methods.push_back(method_to_json(m));
  json sweep = {{"rois", rois},
                {"methods", methods},
                {"eda_references", cfg.sweep.eda_references},
                {"hr_reference", cfg.sweep.hr_reference},
                {"br_reference", cfg.sweep.br_reference},
                {"rates", cfg.sweep.rates}};
  return {{"pipeline", pipeline},
          {"sweep", sweep},
          {"out_dir", cfg.out_dir},
          {"parallel", cfg.parallel},
          {"seed", cfg.seed}};
}

}  // namespace

std::string to_json_string(const RunConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

RunConfig parse_run_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  check_keys(j, {"pipeline", "sweep", "out_dir", "parallel", "seed"}, "<root>");
  read(j, "out_dir", cfg.out_dir);
  read(j, "parallel", cfg.parallel);
  read(j, "seed", cfg.seed);
  if (cfg.parallel < 1) throw ParseError("config: parallel must be >= 1");

  if (j.contains("pipeline")) {
    const json& p = j.at("pipeline");
    PipelineConfig& pc = cfg.pipeline;
    check_keys(p,
               {"pipeline_fps", "landmark_alpha", "max_carry_s", "geometry", "aggregations", "resample_max_gap_s",
                "eda_min_valid_s", "eda_max_bridge_s", "max_lag_s", "min_overlap_s", "min_rate_samples", "hr", "br"},
               "pipeline");
    read(p, "pipeline_fps", pc.pipeline_fps);
    read(p, "landmark_alpha", pc.landmark_alpha);
    read(p, "max_carry_s", pc.max_carry_s);
    read(p, "resample_max_gap_s", pc.resample_max_gap_s);
    read(p, "eda_min_valid_s", pc.eda_min_valid_s);
    read(p, "eda_max_bridge_s", pc.eda_max_bridge_s);
    read(p, "max_lag_s", pc.max_lag_s);
    read(p, "min_overlap_s", pc.min_overlap_s);
    read(p, "min_rate_samples", pc.min_rate_samples);
    if (p.contains("geometry")) {
      const json& g = p.at("geometry");
      RoiGeometry& gg = pc.geometry;
      check_keys(g,
                 {"nose_w", "nose_h", "eye_w", "eye_h", "cheek_w", "cheek_h", "forehead_w", "forehead_h",
                  "canthus_shift", "cheek_lateral", "forehead_gap"},
                 "pipeline.geometry");
      read(g, "nose_w", gg.nose_w);
      read(g, "nose_h", gg.nose_h);
      read(g, "eye_w", gg.eye_w);
      read(g, "eye_h", gg.eye_h);
      read(g, "cheek_w", gg.cheek_w);
      read(g, "cheek_h", gg.cheek_h);
      read(g, "forehead_w", gg.forehead_w);
      read(g, "forehead_h", gg.forehead_h);
      read(g, "canthus_shift", gg.canthus_shift);
      read(g, "cheek_lateral", gg.cheek_lateral);
      read(g, "forehead_gap", gg.forehead_gap);
    }
    if (p.contains("aggregations")) {
      const json& a = p.at("aggregations");
      if (!a.is_object()) throw ParseError("config: 'pipeline.aggregations' must be an object");
      for (const auto& item : a.items()) {
        const RoiKind roi = parse_roi(item.key());
        check_keys(item.value(), {"type", "param"}, "pipeline.aggregations." + item.key());
        AggregationKind kind = parse_aggregation(item.value().at("type").get<std::string>());
        read(item.value(), "param", kind.param);
        kind.validate();
        pc.aggregations[roi] = kind;
      }
    }
    if (p.contains("hr")) {
      const json& h = p.at("hr");
      check_keys(h, {"prefilter_low_hz", "prefilter_high_hz", "prefilter_order", "band_order", "max_bridge_s",
                     "min_valid_s", "rate"},
                 "pipeline.hr");
      read(h, "prefilter_low_hz", pc.hr.prefilter_low_hz);
      read(h, "prefilter_high_hz", pc.hr.prefilter_high_hz);
      read(h, "prefilter_order", pc.hr.prefilter_order);
      read(h, "band_order", pc.hr.band_order);
      read(h, "max_bridge_s", pc.hr.max_bridge_s);
      read(h, "min_valid_s", pc.hr.min_valid_s);
      if (h.contains("rate")) rate_from_json(h.at("rate"), pc.hr.rate, "pipeline.hr.rate");
    }
    if (p.contains("br")) {
      const json& b = p.at("br");
      check_keys(b, {"prefilter_low_hz", "prefilter_high_hz", "prefilter_order", "max_bridge_s", "min_valid_s", "rate"},
                 "pipeline.br");
      read(b, "prefilter_low_hz", pc.br.prefilter_low_hz);
      read(b, "prefilter_high_hz", pc.br.prefilter_high_hz);
      read(b, "prefilter_order", pc.br.prefilter_order);
      read(b, "max_bridge_s", pc.br.max_bridge_s);
      read(b, "min_valid_s", pc.br.min_valid_s);
      if (b.contains("rate")) rate_from_json(b.at("rate"), pc.br.rate, "pipeline.br.rate");
    }
  }

  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    check_keys(s, {"rois", "methods", "eda_references", "hr_reference", "br_reference", "rates"}, "sweep");
    if (s.contains("rois")) {
      cfg.sweep.rois.clear();
      for (const auto& r : s.at("rois")) cfg.sweep.rois.push_back(parse_roi(r.get<std::string>()));
    }
    if (s.contains("methods")) {
      cfg.sweep.methods.clear();
      for (const auto& m : s.at("methods")) cfg.sweep.methods.push_back(method_from_json(m));
    }
    read(s, "eda_references", cfg.sweep.eda_references);
    read(s, "hr_reference", cfg.sweep.hr_reference);
    read(s, "br_reference", cfg.sweep.br_reference);
    read(s, "rates", cfg.sweep.rates);
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string config_hash(const RunConfig& cfg) {
  // where results go and how many workers produce them do not change them
  RunConfig canonical = cfg;
  canonical.out_dir.clear();
  canonical.parallel = 1;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_json_string(canonical)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig default_run_config() {
  if (const char* path = std::getenv("THERMOSIG_CONFIG"); path != nullptr && *path != '\0')
    return load_run_config(path);
  return {};
}

}  // namespace thermosig
