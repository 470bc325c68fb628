#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "immpc/sim.hpp"

using namespace immpc;
using nlohmann::json;

namespace {

json small_doc(int assets = 6, double hours = 8.0) {
  return {{"name", "small"},
          {"stations", {{"stations",
                         {{{"name", "Svalbard"}, {"latitude_deg", 78.23}, {"longitude_deg", 15.41}},
                          {{"name", "Troll"}, {"latitude_deg", -72.01}, {"longitude_deg", 2.53}}}}}},
          {"assets", assets},
          {"epoch", "2026-03-01T00:00:00Z"},
          {"duration_hours", hours},
          {"fleet", {{"raan_deg", 30}, {"spacing_deg", 360.0 / assets}}},
          {"prior", {{"OK", 0.7}, {"GNC", 0.1}, {"COMMS", 0.05}, {"DEP", 0.1}, {"DEAD", 0.05}}},
          {"composition", {{"nominal", 0.5}, {"dead", 0.17}, {"faulted", 0.33}}},
          {"fault_mix", {{"GNC", 0.5}, {"DEP", 0.5}}},
          {"planning", {{"scenarios", 12}, {"horizon_hours", 2}}}};
}

SimConfig small_config(int assets = 6, double hours = 8.0) {
  return parse_config(small_doc(assets, hours), ".");
}

std::string init_truth_line(const std::string& trace) {
  std::istringstream in(trace);
  std::string line;
  std::getline(in, line);
  return json::parse(line).at("truth").dump();
}

}  // namespace

TEST_CASE("composition counts") {
  const Composition c;
  CHECK(composition_counts(20, c) == std::array<int, 3>{14, 3, 3});
  CHECK(composition_counts(100, c) == std::array<int, 3>{70, 15, 15});
  for (int n = 0; n < 200; ++n) {
    const auto k = composition_counts(n, c);
    CHECK(k[0] + k[1] + k[2] == n);
  }
}

TEST_CASE("truth initialisation") {
  const SimConfig cfg = small_config(30);
  const FleetTruth a = init_truth(cfg, 5), b = init_truth(cfg, 5), c = init_truth(cfg, 6);
  REQUIRE(a.assets.size() == 30);
  int nominal = 0, dead = 0, faulted = 0, differ = 0;
  const ModeSet& modes = cfg.model.modes;
  for (std::size_t i = 0; i < 30; ++i) {
    const AssetTruth& x = a.assets[i];
    CHECK(x.mode == b.assets[i].mode);
    CHECK(x.t_death == b.assets[i].t_death);
    differ += x.mode != c.assets[i].mode;
    if (x.mode == modes.ok()) ++nominal;
    else if (x.mode == modes.dead()) ++dead;
    else {
      ++faulted;
      const FaultMode& f = modes[x.mode];
      CHECK((f.name == "GNC" || f.name == "DEP"));
      REQUIRE(x.t_death.has_value());
      const double h = hours_between(cfg.epoch, *x.t_death);
      CHECK(h >= 6.0);
      CHECK(h < 24.0);
      CHECK(x.recovery_minutes >= 15.0);
      CHECK(x.recovery_minutes < 120.0);
    }
  }
  const auto k = composition_counts(30, cfg.composition);
  CHECK(nominal == k[0]);
  CHECK(dead == k[1]);
  CHECK(faulted == k[2]);
  CHECK(differ > 0);
}

TEST_CASE("truth dynamics") {
  const SimConfig cfg = small_config();
  const ModeSet& modes = cfg.model.modes;
  const ModeId gnc = modes.index_of("GNC");
  const UtcTime t0 = cfg.epoch;
  FleetTruth truth;
  truth.now = t0;
  AssetTruth late;  // intervention finishes after death
  late.mode = late.initial_mode = gnc;
  late.t_death = add_hours(t0, 10.0);
  late.recovery_minutes = 60.0;
  AssetTruth early = late;  // intervention finishes first
  AssetTruth idle = late;   // never treated
  truth.assets = {late, early, idle};
  start_intervention(truth, 0, add_hours(t0, 9.5), modes);
  start_intervention(truth, 1, add_hours(t0, 8.0), modes);
  start_intervention(truth, 1, add_hours(t0, 8.5), modes);  // only the first counts
  CHECK(*truth.assets[1].intervention_start == add_hours(t0, 8.0));

  step_truth(truth, add_hours(t0, 8.9), modes);
  CHECK(truth.assets[1].mode == gnc);
  step_truth(truth, add_hours(t0, 9.0), modes);
  CHECK(truth.assets[1].mode == modes.ok());
  CHECK(*truth.assets[1].resolved_at == add_hours(t0, 9.0));
  step_truth(truth, add_hours(t0, 12.0), modes);
  CHECK(truth.assets[0].mode == modes.dead());
  CHECK(*truth.assets[0].resolved_at == add_hours(t0, 10.0));
  CHECK(truth.assets[1].mode == modes.ok());
  CHECK(truth.assets[2].mode == modes.dead());
  CHECK_FALSE(truth.alive(2, modes));
  // Dead assets cannot start an intervention.
  start_intervention(truth, 2, add_hours(t0, 12.0), modes);
  CHECK_FALSE(truth.assets[2].intervention_start.has_value());
}

TEST_CASE("observations follow the likelihood table") {
  const SimConfig cfg = small_config();
  const ModelBundle& mb = cfg.model;
  const ModeId ok = mb.modes.ok(), comms = mb.modes.index_of("COMMS"), dep = mb.modes.index_of("DEP");
  CHECK(observe(ok, mb.contact(), 0.6, mb.likelihood, 0.59) == Observation::contact);
  CHECK(observe(ok, mb.contact(), 0.6, mb.likelihood, 0.61) == Observation::no_contact);
  CHECK(observe(comms, mb.contact(), 0.6, mb.likelihood, 0.0) == Observation::no_contact);
  CHECK(observe(comms, mb.beacon(), 0.6, mb.likelihood, 0.79) == Observation::beacon);
  CHECK(observe(dep, mb.beacon(), 0.6, mb.likelihood, 0.06) == Observation::no_beacon);
}

TEST_CASE("trials conserve assets and are reproducible") {
  const SimConfig cfg = small_config();
  const auto windows = campaign_windows(cfg);
  REQUIRE_FALSE(windows.empty());
  std::map<Planner, std::string> truths;
  for (Planner p : kAllPlanners) {
    std::ostringstream t1, t2;
    const TrialMetrics a = run_trial(cfg, windows, 2, 11, {p, SolverKind::exact, &t1});
    const TrialMetrics b = run_trial(cfg, windows, 2, 11, {p, SolverKind::exact, &t2});
    CHECK(a.acquired + a.lost + a.unresolved == cfg.assets);
    CHECK(a.outcomes.size() == static_cast<std::size_t>(cfg.assets));
    CHECK(a.acquired == b.acquired);
    CHECK(a.actions == b.actions);
    CHECK(a.solves == b.solves);
    CHECK(t1.str() == t2.str());
    CHECK(a.actions > 0);
    CHECK(a.overall_pct == doctest::Approx(100.0 * a.acquired / cfg.assets));
    truths[p] = init_truth_line(t1.str());
    for (const AssetOutcome& o : a.outcomes) {
      if (o.status == AssetOutcome::Status::acquired) CHECK(o.acquired);
      if (o.status == AssetOutcome::Status::lost) CHECK(o.final_mode == cfg.model.modes.dead());
    }
  }
  CHECK(truths[Planner::imm] == truths[Planner::binary]);
  CHECK(truths[Planner::imm] == truths[Planner::bipartite]);
}

TEST_CASE("executed windows never overlap on a station or asset") {
  const SimConfig cfg = small_config();
  const auto windows = campaign_windows(cfg);
  std::ostringstream trace;
  run_trial(cfg, windows, 0, 3, {Planner::imm, SolverKind::exact, &trace});
  std::istringstream in(trace.str());
  std::string line;
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> by_station, by_asset;
  while (std::getline(in, line)) {
    const json e = json::parse(line);
    if (e["event"] != "action") continue;
    const auto span = std::make_pair(e["t_start"].get<std::string>(), e["t_end"].get<std::string>());
    by_station[e["station"].get<std::string>()].push_back(span);
    by_asset[std::to_string(e["asset"].get<int>())].push_back(span);
  }
  REQUIRE_FALSE(by_station.empty());
  auto disjoint = [](std::vector<std::pair<std::string, std::string>> v) {
    std::sort(v.begin(), v.end());
    for (std::size_t i = 1; i < v.size(); ++i)
      if (parse_iso8601(v[i].first) < parse_iso8601(v[i - 1].second)) return false;
    return true;
  };
  for (const auto& [_, v] : by_station) CHECK(disjoint(v));
  for (const auto& [_, v] : by_asset) CHECK(disjoint(v));
}

TEST_CASE("no stations means no acquisitions") {
  json doc = small_doc();
  doc["stations"] = {{"stations", json::array()}};
  const SimConfig cfg = parse_config(doc, ".");
  const auto windows = campaign_windows(cfg);
  CHECK(windows.empty());
  for (Planner p : kAllPlanners) {
    const TrialMetrics m = run_trial(cfg, windows, 0, 1, {p, SolverKind::exact, nullptr});
    CHECK(m.acquired == 0);
    CHECK(m.solves == 0);
    CHECK(m.overall_pct == 0.0);
    CHECK(m.unresolved + m.lost == cfg.assets);
  }
}

TEST_CASE("campaign statistics") {
  const std::vector<double> one{42.0};
  const Stat s1 = summarize(one);
  CHECK(s1.mean == 42.0);
  CHECK_FALSE(s1.ci95.has_value());
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const Stat s = summarize(v);
  CHECK(s.mean == 2.5);
  CHECK(*s.ci95 == doctest::Approx(1.96 * std::sqrt(5.0 / 3.0) / 2.0));

  const SimConfig cfg = small_config(4, 4.0);
  const auto windows = campaign_windows(cfg);
  const CampaignResult single = run_campaign(cfg, windows, Planner::binary, 1, 9);
  const json summary = summary_json(single, cfg.model.modes);
  CHECK(summary["overall_pct"]["ci95"].is_null());
  CHECK(summary["trials"] == 1);
  std::ostringstream cmp;
  const std::vector<CampaignResult> rs{single};
  write_comparison(cmp, rs);
  CHECK(cmp.str().rfind("planner,overall_pct,lethal_pct,solve_mean_s\n", 0) == 0);

  CampaignOptions two_jobs;
  two_jobs.jobs = 2;
  const CampaignResult a = run_campaign(cfg, windows, Planner::imm, 3, 9);
  const CampaignResult b = run_campaign(cfg, windows, Planner::imm, 3, 9, two_jobs);
  std::ostringstream ca, cb;
  write_metrics_csv(ca, std::vector<CampaignResult>{a});
  write_metrics_csv(cb, std::vector<CampaignResult>{b});
  CHECK(ca.str() == cb.str());
  CHECK(ca.str().rfind(std::string(kMetricsCsvHeader) + "\n", 0) == 0);
  CHECK(a.trials[1].seed == trial_seed(9, 1));
  CHECK(summary_json(a, cfg.model.modes)["overall_pct"]["ci95"].is_number());
  CHECK_THROWS_AS(run_campaign(cfg, windows, Planner::imm, 0, 9), std::invalid_argument);
}

TEST_CASE("planner names") {
  for (Planner p : kAllPlanners) CHECK(planner_from_string(to_string(p)) == p);
  CHECK_THROWS_AS(planner_from_string("oracle"), std::invalid_argument);
}
