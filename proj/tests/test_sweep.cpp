#include "doctest.h"
#include "support.hpp"

#include "thermosig/config.hpp"
#include "thermosig/sweep.hpp"
#include "thermosig/synthetic.hpp"

#include <json.hpp>

#include <set>
#include <string>

using namespace thermosig;
namespace fs = std::filesystem;

namespace {

SessionInput synth_input(std::uint64_t seed, std::string id = {}, double duration = 300.0) {
  SyntheticSpec s;
  s.duration_s = duration;
  s.seed = seed;
  s.noise.white_sigma = 0.3;
  auto g = gen_session(s);
  SessionInput in;
  in.meta = g.meta;
  if (!id.empty()) in.meta.session_id = id;
  in.meta.subject_id = "subj" + std::to_string(seed % 2);
  in.traces = std::move(g.traces);
  in.references = std::move(g.references);
  return in;
}

RunConfig fast_config() {
  RunConfig cfg;
  cfg.sweep.eda_references = {"PEDA"};
  return cfg;
}

}  // namespace

TEST_CASE("config json round-trip and hash") {
  RunConfig cfg;
  cfg.pipeline.max_lag_s = 90.0;
  cfg.pipeline.aggregations[RoiKind::Nose] = AggregationKind::trimmed(0.2);
  cfg.sweep.rois = {RoiKind::Nose, RoiKind::CheeksAvg};
  cfg.seed = 17;
  const std::string text = to_json_string(cfg);
  const RunConfig back = parse_run_config(text);
  CHECK(to_json_string(back) == text);
  CHECK(config_hash(back) == config_hash(cfg));
  CHECK(config_hash(cfg).size() == 16);

  RunConfig other = cfg;
  other.out_dir = "elsewhere";
  other.parallel = 8;
  CHECK(config_hash(other) == config_hash(cfg));
  other.pipeline.max_lag_s = 60.0;
  CHECK(config_hash(other) != config_hash(cfg));

  CHECK(to_json_string(parse_run_config("{}")) == to_json_string(RunConfig{}));
}

TEST_CASE("config rejects unknown keys and bad values") {
  CHECK_THROWS_AS(parse_run_config(R"({"pipline": {}})"), ParseError);
  CHECK_THROWS_AS(parse_run_config(R"({"pipeline": {"max_lag": 3}})"), ParseError);
  CHECK_THROWS_AS(parse_run_config(R"({"parallel": 0})"), ParseError);
  CHECK_THROWS_AS(parse_run_config(R"({"pipeline": {"max_lag_s": "long"}})"), ParseError);
  CHECK_THROWS_AS(parse_run_config("not json"), ParseError);
  try {
    parse_run_config(R"({"sweep": {"roi": []}})");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("'roi'") != std::string::npos);
  }
}

TEST_CASE("summaries of metric lists") {
  const auto s = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(s.n == 4);
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.std == doctest::Approx(std::sqrt(1.25)));
  const auto e = summarize({});
  CHECK(e.n == 0);
}

TEST_CASE("default sweep covers the full grid") {
  const auto res = run_sweep(std::vector<SessionInput>{synth_input(1)}, fast_config());
  CHECK(res.grid.size() == 48);
  std::set<std::pair<RoiKind, EdaMethod>> cells;
  for (const auto& c : res.grid) {
    cells.insert({c.roi, c.method});
    CHECK(c.report.has_value());
    CHECK(c.error.empty());
  }
  CHECK(cells.size() == 48);
  REQUIRE(res.rates.size() == 2);
  CHECK(res.rates[0].kind == BiosignalKind::HeartRate);
  CHECK(res.rates[1].kind == BiosignalKind::BreathingRate);
  for (const auto& r : res.rates) {
    REQUIRE(r.report);
    CHECK(r.report->n_valid >= 30);
    CHECK(r.invalid_fraction < 1.0);
  }
}

TEST_CASE("oracle selection dominates every fixed configuration") {
  std::vector<SessionInput> sessions;
  for (std::uint64_t s = 1; s <= 3; ++s) sessions.push_back(synth_input(s));
  const auto res = run_sweep(sessions, fast_config());
  REQUIRE(res.oracle_summary.size() == 1);
  const auto& os = res.oracle_summary[0];
  CHECK(os.pcc_abs.n == 3);
  for (const auto& s : res.summaries)
    if (s.group_by == "all") CHECK(os.pcc_abs.mean >= s.pcc_abs.mean - 1e-12);
  CHECK(os.best_fixed_mean <= os.pcc_abs.mean + 1e-12);
  for (const auto& o : res.oracle)
    for (const auto& c : res.grid)
      if (c.session_id == o.session_id && c.report) CHECK(o.pcc_abs >= c.report->pcc_abs);
  CHECK(res.overlays.size() == 3);
  for (const auto& ov : res.overlays) {
    CHECK(ov.time.size() == ov.estimate.size());
    CHECK(ov.time.size() > 250);  // 1 Hz trend over a 300 s session
  }
}

TEST_CASE("identical sessions give zero spread") {
  std::vector<SessionInput> sessions{synth_input(5, "a"), synth_input(5, "b")};
  sessions[1].meta.subject_id = sessions[0].meta.subject_id;
  const auto res = run_sweep(sessions, fast_config());
  for (const auto& s : res.summaries) {
    if (s.group_by != "all") continue;
    CHECK(s.pcc_abs.n == 2);
    CHECK(s.pcc_abs.std == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.spearman.std == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("summaries can be recomputed from the grid") {
  std::vector<SessionInput> sessions;
  for (std::uint64_t s = 1; s <= 4; ++s) sessions.push_back(synth_input(s));
  sessions[2].meta.sex = Sex::F;
  const auto res = run_sweep(sessions, fast_config());
  std::size_t checked = 0;
  for (const auto& s : res.summaries) {
    std::vector<double> v;
    for (const auto& c : res.grid) {
      if (c.roi != s.roi || c.method != s.method || c.reference != s.reference || !c.report) continue;
      const auto it = std::find_if(sessions.begin(), sessions.end(),
                                   [&](const SessionInput& in) { return in.meta.session_id == c.session_id; });
      const SessionMeta& m = it->meta;
      const std::string key = s.group_by == "all"       ? "all"
                              : s.group_by == "subject" ? m.subject_id
                              : s.group_by == "sex"     ? std::string(to_string(m.sex))
                              : s.group_by == "age_group" ? std::string(to_string(m.age_group))
                                                        : m.condition_name();
      if (key == s.group) v.push_back(c.report->pcc_abs);
    }
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());
    CHECK(s.pcc_abs.n == v.size());
    CHECK(std::abs(s.pcc_abs.mean - mean) <= 1e-12);
    CHECK(std::abs(s.pcc_abs.std - std::sqrt(var)) <= 1e-12);
    ++checked;
  }
  CHECK(checked >= 48 * 4);
}

TEST_CASE("polarity census follows the embedded sign") {
  std::vector<SessionInput> sessions;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    SyntheticSpec s;
    s.duration_s = 300.0;
    s.seed = seed;
    s.eda.polarity = seed <= 3 ? -1.0 : 1.0;
    auto g = gen_session(s);
    sessions.push_back({g.meta, g.traces, g.references});
  }
  const auto res = run_sweep(sessions, fast_config());
  CHECK(polarity_census(res, RoiKind::Nose, EdaMethod::ButterworthLp, "PEDA") == doctest::Approx(0.25));
  CHECK_THROWS_AS(polarity_census(res, RoiKind::Nose, EdaMethod::ButterworthLp, "PP"), InvalidArgument);
}

TEST_CASE("results do not depend on the thread count") {
  std::vector<SessionInput> sessions;
  for (std::uint64_t s = 1; s <= 3; ++s) sessions.push_back(synth_input(s));
  RunConfig one = fast_config();
  RunConfig many = fast_config();
  many.parallel = 3;
  const auto a = run_sweep(sessions, one);
  const auto b = run_sweep(sessions, many);
  REQUIRE(a.grid.size() == b.grid.size());
  for (std::size_t i = 0; i < a.grid.size(); ++i) {
    CHECK(a.grid[i].session_id == b.grid[i].session_id);
    CHECK(a.grid[i].report->pcc_abs == b.grid[i].report->pcc_abs);
    CHECK(a.grid[i].report->tau_star_s == b.grid[i].report->tau_star_s);
  }
  const auto d1 = tsupport::scratch_dir("sweep_det1");
  const auto d2 = tsupport::scratch_dir("sweep_det2");
  write_sweep(d1, a, one);
  write_sweep(d2, b, many);
  for (const char* f : {"grid.csv", "rates.csv", "summary.json", "provenance.json"})
    CHECK(read_text(d1 / f) == read_text(d2 / f));
}

TEST_CASE("duplicate session ids are rejected") {
  std::vector<SessionInput> sessions{synth_input(1, "same"), synth_input(2, "same")};
  CHECK_THROWS_WITH_AS(run_sweep(sessions, fast_config()), doctest::Contains("duplicate session id 'same'"),
                       InvalidArgument);
  CHECK_THROWS_AS(run_sweep(std::vector<SessionInput>{}, fast_config()), InvalidArgument);
}

TEST_CASE("cell failures are recorded, not thrown") {
  SessionInput shortie = synth_input(3, "short", 60.0);
  SessionInput good = synth_input(4, "good");
  const auto res = run_sweep(std::vector<SessionInput>{shortie, good}, fast_config());
  std::size_t failed = 0, ok = 0;
  for (const auto& c : res.grid) {
    if (c.session_id == "short") {
      CHECK_FALSE(c.report.has_value());
      CHECK_FALSE(c.error.empty());
      ++failed;
    } else {
      ok += c.report ? 1 : 0;
    }
  }
  CHECK(failed == 48);
  CHECK(ok == 48);
  for (const auto& s : res.summaries)
    if (s.group_by == "all") CHECK(s.errors == 1);
}

TEST_CASE("sweep outputs on disk") {
  const auto dir = tsupport::scratch_dir("sweep_out");
  const RunConfig cfg = fast_config();
  const auto res = run_sweep(std::vector<SessionInput>{synth_input(1), synth_input(2)}, cfg);
  write_sweep(dir, res, cfg);
  const auto grid = load_grid(dir / "grid.csv");
  REQUIRE(grid.size() == res.grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(grid[i].roi == res.grid[i].roi);
    CHECK(grid[i].method == res.grid[i].method);
    REQUIRE(grid[i].report);
    CHECK(grid[i].report->pcc_abs == res.grid[i].report->pcc_abs);
  }
  const auto summary = nlohmann::json::parse(read_text(dir / "summary.json"));
  CHECK(summary.at("sessions").size() == 2);
  CHECK(summary.at("oracle_summary").size() == 1);
  const auto prov = nlohmann::json::parse(read_text(dir / "provenance.json"));
  CHECK(prov.at("config_hash") == config_hash(cfg));
  CHECK(prov.at("command") == "sweep");
  CHECK(fs::exists(dir / "trends"));
}

TEST_CASE("session directories feed the sweep") {
  const auto root = tsupport::scratch_dir("sweep_dirs");
  for (std::uint64_t seed = 1; seed <= 2; ++seed) {
    const SessionInput in = synth_input(seed);
    SessionBundle b;
    b.meta = in.meta;
    b.traces = in.traces;
    b.references = in.references;
    write_session(root / in.meta.session_id, b);
  }
  const RunConfig cfg = fast_config();
  const auto from_dirs = run_sweep(find_sessions(root), cfg);
  const auto direct = run_sweep(std::vector<SessionInput>{synth_input(1), synth_input(2)}, cfg);
  REQUIRE(from_dirs.grid.size() == direct.grid.size());
  for (std::size_t i = 0; i < direct.grid.size(); ++i)
    CHECK(from_dirs.grid[i].report->pcc_abs == doctest::Approx(direct.grid[i].report->pcc_abs).epsilon(1e-9));
}
