#include "immpc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

namespace immpc {
namespace {

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

nlohmann::json stat_json(const Stat& s) {
  return {{"mean", s.mean},
          {"ci95", s.ci95 ? nlohmann::json(*s.ci95) : nlohmann::json(nullptr)},
          {"n", s.n}};
}

std::vector<double> success_vector(const ModelBundle& mb, ActionId action, double p_link) {
  std::vector<double> s(mb.modes.size(), 0.0);
  for (const FaultMode& m : mb.modes.modes()) {
    if (m.id == mb.modes.ok() || m.id == mb.modes.dead()) continue;
    if (action == mb.contact())
      s[static_cast<std::size_t>(m.id)] = m.responds_to(action) ? 1.0 : 0.0;
    else
      s[static_cast<std::size_t>(m.id)] = mb.success.probability(action, m, p_link, mb.likelihood);
  }
  return s;
}

}  // namespace

Planner planner_from_string(std::string_view s) {
  if (s == "imm") return Planner::imm;
  if (s == "binary") return Planner::binary;
  if (s == "bipartite") return Planner::bipartite;
  throw std::invalid_argument("unknown planner '" + std::string(s) + "'");
}

const char* to_string(Planner p) {
  switch (p) {
    case Planner::imm: return "imm";
    case Planner::binary: return "binary";
    case Planner::bipartite: return "bipartite";
  }
  return "?";
}

const char* to_string(AssetOutcome::Status s) {
  switch (s) {
    case AssetOutcome::Status::acquired: return "acquired";
    case AssetOutcome::Status::lost: return "lost";
    case AssetOutcome::Status::unresolved: return "unresolved";
  }
  return "?";
}

std::array<int, 3> composition_counts(int n, const Composition& c) {
  const std::array<double, 3> share{c.nominal, c.dead, c.faulted};
  std::array<int, 3> counts{};
  std::array<double, 3> frac{};
  int assigned = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double x = n * share[k];
    counts[k] = static_cast<int>(std::floor(x + 1e-9));
    frac[k] = x - counts[k];
    assigned += counts[k];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t k = 0; assigned < n; k = (k + 1) % 3, ++assigned) ++counts[order[k]];
  return counts;
}

std::uint64_t trial_seed(std::uint64_t base_seed, int trial) {
  return derive_seed(base_seed, {stream::kTrial, static_cast<std::uint64_t>(trial)});
}

FleetTruth init_truth(const SimConfig& config, std::uint64_t seed) {
  const ModeSet& modes = config.model.modes;
  Rng rng = make_stream(seed, {stream::kTruth});
  const auto counts = composition_counts(config.assets, config.composition);
  std::vector<int> role;
  for (int k = 0; k < 3; ++k) role.insert(role.end(), static_cast<std::size_t>(counts[static_cast<std::size_t>(k)]), k);
  shuffle(rng, role);

  std::vector<ModeId> fault_modes;
  std::vector<double> fault_share;
  for (const FaultMode& m : modes.modes()) {
    auto it = config.fault_mix.find(m.name);
    if (it == config.fault_mix.end()) continue;
    fault_modes.push_back(m.id);
    fault_share.push_back(it->second);
  }

  FleetTruth truth;
  truth.now = config.epoch;
  const UtcTime onset = add_hours(config.epoch, config.t_sep_hours);
  for (int r : role) {
    AssetTruth a;
    if (r == 0) {
      a.mode = modes.ok();
    } else if (r == 1) {
      a.mode = modes.dead();
    } else {
      a.mode = fault_modes[categorical(rng, fault_share, fault_share.size())];
      const FaultMode& f = modes[a.mode];
      if (f.lethal) a.t_death = add_hours(onset, f.ttd->sample_hours(rng));
      if (f.recovery) a.recovery_minutes = f.recovery->sample_hours(rng) * 60.0;
    }
    a.initial_mode = a.mode;
    truth.assets.push_back(a);
  }
  return truth;
}

void step_truth(FleetTruth& truth, UtcTime t, const ModeSet& modes) {
  for (AssetTruth& a : truth.assets) {
    if (a.mode == modes.dead() || a.mode == modes.ok()) continue;
    if (a.intervention_start) {
      const UtcTime done = add_seconds(*a.intervention_start, a.recovery_minutes * 60.0);
      if (done <= t && (!a.t_death || done <= *a.t_death)) {
        a.mode = modes.ok();
        a.resolved_at = done;
        continue;
      }
    }
    if (a.t_death && *a.t_death <= t) {
      a.mode = modes.dead();
      a.resolved_at = a.t_death;
    }
  }
  truth.now = std::max(truth.now, t);
}

void start_intervention(FleetTruth& truth, int asset, UtcTime at, const ModeSet& modes) {
  AssetTruth& a = truth.assets.at(static_cast<std::size_t>(asset));
  if (a.mode == modes.dead() || a.mode == modes.ok() || a.intervention_start) return;
  a.intervention_start = at;
}

Observation observe(ModeId true_mode, ActionId action, double p_link, const LikelihoodTable& table,
                    double u) {
  const LikelihoodEntry* e = table.find(true_mode, action);
  if (!e) return Observation::no_contact;
  const double p = table.row(true_mode, action, p_link)[static_cast<std::size_t>(e->positive)];
  return u < p ? e->positive : e->negative;
}

std::vector<ContactWindow> campaign_windows(const SimConfig& config) {
  const std::vector<ActionId> actions{config.model.contact(), config.model.beacon()};
  return generate_windows(config.orbits(), config.stations, config.horizon(), config.step_seconds,
                          actions);
}

TrialMetrics run_trial(const SimConfig& config, std::span<const ContactWindow> windows, int trial,
                       std::uint64_t base_seed, const RunOptions& options) {
  const ModelBundle& mb = config.model;
  const ModeSet& modes = mb.modes;
  const ActionId contact = mb.contact();
  const ActionId recover = mb.recover();
  const PlanningConfig& plan = config.planning;
  const SolveOptions solve_options{plan.exact_limit, plan.node_limit};
  const std::uint64_t seed = trial_seed(base_seed, trial);
  const auto n = static_cast<std::size_t>(config.assets);
  const double dt = mb.model.dt();
  const UtcTime end = add_hours(config.epoch, config.duration_hours);

  FleetTruth truth = init_truth(config, seed);

  std::vector<ContactWindow> pool;
  int first_recover_id = 0;
  for (const ContactWindow& w : windows) {
    first_recover_id = std::max(first_recover_id, w.id + 1);
    if (options.planner == Planner::imm || w.action == contact) pool.push_back(w);
  }
  std::stable_sort(pool.begin(), pool.end(),
                   [](const ContactWindow& a, const ContactWindow& b) { return a.start < b.start; });

  std::vector<Belief> beliefs(n);
  for (std::size_t i = 0; i < n; ++i) beliefs[i] = Belief{config.prior, config.t_sep_hours, static_cast<int>(i)};
  AlivenessState aliveness = initial_aliveness(n, 1.0 - config.prior(modes.dead()));
  std::vector<char> acquired(n, 0);
  std::vector<std::optional<UtcTime>> acquired_at(n);
  long steps_done = 0;
  auto advance_beliefs = [&](UtcTime t) {
    const long k = static_cast<long>(std::floor(hours_between(config.epoch, t) / dt + 1e-9));
    for (; steps_done < k; ++steps_done)
      for (std::size_t i = 0; i < n; ++i)
        if (!acquired[i]) beliefs[i] = predict(beliefs[i], mb.model);
  };

  auto emit = [&](nlohmann::json line) {
    if (options.trace) *options.trace << line.dump() << '\n';
  };
  if (options.trace) {
    nlohmann::json assets = nlohmann::json::array();
    for (std::size_t i = 0; i < n; ++i) {
      const AssetTruth& a = truth.assets[i];
      assets.push_back({{"asset", i},
                        {"mode", modes[a.mode].name},
                        {"t_death", a.t_death ? nlohmann::json(format_iso8601(*a.t_death)) : nlohmann::json(nullptr)},
                        {"recovery_minutes", a.recovery_minutes}});
    }
    emit({{"event", "init"}, {"planner", to_string(options.planner)}, {"trial", trial},
          {"seed", seed}, {"truth", assets}});
  }

  TrialMetrics m;
  m.trial = trial;
  m.seed = seed;
  m.assets = config.assets;
  double solve_total = 0.0;

  const InfoContext info_ctx{mb.link, mb.likelihood, mb.model};
  const OutcomeContext outcome_ctx{modes, mb.link, mb.likelihood, mb.success};
  // Executed windows hold their station and asset until they end; their
  // observations reach the planner at that point.
  struct Pending {
    ContactWindow window;
    ModeId true_mode;
    Observation obs;
    double p_link;
  };
  std::vector<Pending> pending;
  std::map<std::string, UtcTime> station_busy;
  std::vector<UtcTime> asset_busy(n, config.epoch);

  auto apply = [&](const Pending& e) {
    const ContactWindow& w = e.window;
    const auto asset = static_cast<std::size_t>(w.asset);
    nlohmann::json state;
    if (options.planner == Planner::imm) {
      advance_beliefs(w.end);
      Belief& b = beliefs[asset];
      try {
        b = update(b, w.action, e.obs, e.p_link, mb.likelihood);
      } catch (const ImpossibleEvidence&) {
        // Belief had no support for the observation; keep it as is.
      }
      if ((w.action == contact && e.obs == Observation::contact) || w.action == recover)
        b = intervene(b, success_vector(mb, w.action, e.p_link), modes.ok());
      if (w.action == contact && !acquired[asset] && is_acquired(b, modes.ok(), plan.theta)) {
        acquired[asset] = 1;
        acquired_at[asset] = w.end;
        b.tau = 0.0;
      }
      state = to_json(b, modes);
    } else {
      binary_update(aliveness, w.asset, w.action, e.obs, e.p_link, mb.likelihood, modes);
      const double p = aliveness.p_alive[asset];
      if (w.action == contact && !acquired[asset] && p > plan.theta) {
        acquired[asset] = 1;
        acquired_at[asset] = w.end;
      }
      state = {{"asset", w.asset}, {"p_alive", p}};
    }
    emit({{"event", "action"},
          {"t_start", format_iso8601(w.start)},
          {"t_end", format_iso8601(w.end)},
          {"window", w.id},
          {"asset", w.asset},
          {"station", w.station},
          {"action", mb.actions[w.action].name},
          {"true_mode", modes[e.true_mode].name},
          {"observation", to_string(e.obs)},
          {"acquired", static_cast<bool>(acquired[asset])},
          {"belief", state}});
  };
  auto apply_due = [&](UtcTime t) {
    std::stable_sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
      return a.window.end < b.window.end || (a.window.end == b.window.end && a.window.id < b.window.id);
    });
    std::size_t k = 0;
    for (; k < pending.size() && pending[k].window.end <= t; ++k) apply(pending[k]);
    pending.erase(pending.begin(), pending.begin() + static_cast<std::ptrdiff_t>(k));
  };
  auto next_due = [&]() -> std::optional<UtcTime> {
    std::optional<UtcTime> out;
    for (const Pending& e : pending)
      if (!out || e.window.end < *out) out = e.window.end;
    return out;
  };
  // Bipartite matching carries no health state, so it keeps every asset in play.
  const bool track_acquired = options.planner != Planner::bipartite;
  auto wanted = [&](int asset) { return !track_acquired || !acquired[static_cast<std::size_t>(asset)]; };
  auto eligible = [&](const ContactWindow& w) {
    const auto a = static_cast<std::size_t>(w.asset);
    if (!wanted(w.asset) || asset_busy[a] > w.start) return false;
    auto it = station_busy.find(w.station);
    return it == station_busy.end() || it->second <= w.start;
  };

  std::size_t cursor = 0;
  UtcTime t = config.epoch;
  while (t < end) {
    apply_due(t);
    while (cursor < pool.size() && pool[cursor].start < t) ++cursor;
    const UtcTime horizon_end = std::min(add_hours(t, plan.horizon_hours), end);
    std::vector<ContactWindow> cands;
    for (std::size_t k = cursor; k < pool.size() && pool[k].start < horizon_end; ++k)
      if (eligible(pool[k])) cands.push_back(pool[k]);
    if (cands.empty()) {
      std::optional<UtcTime> next = next_due();
      for (std::size_t k = cursor; k < pool.size(); ++k) {
        if (pool[k].start >= horizon_end && wanted(pool[k].asset)) {
          if (!next || pool[k].start < *next) next = pool[k].start;
          break;
        }
      }
      if (!next || *next >= end) break;
      t = std::max(*next, add_seconds(t, 0.001));
      continue;
    }

    const auto t0 = std::chrono::steady_clock::now();
    Schedule schedule;
    switch (options.planner) {
      case Planner::imm: {
        advance_beliefs(t);
        std::vector<Belief> active;
        for (std::size_t i = 0; i < n; ++i)
          if (!acquired[i]) active.push_back(beliefs[i]);
        auto recovers = synthesize_recover_windows(active, cands, modes, contact, recover,
                                                   plan.recover_threshold, first_recover_id);
        cands.insert(cands.end(), recovers.begin(), recovers.end());
        const auto tag = static_cast<std::uint64_t>(t.ms);
        ScenarioSet scen = sample_trajectories(active, mb.model, config.horizon_steps(), plan.scenarios,
                                               derive_seed(seed, {stream::kScenario, tag}), t);
        scen = sample_outcomes(std::move(scen), cands, outcome_ctx,
                               derive_seed(seed, {stream::kOutcome, tag}));
        const ScheduleProblem problem =
            build_problem(active, cands, scen, info_ctx, config.priority, plan.lambda, t);
        schedule = solve(problem, options.solver, solve_options);
        break;
      }
      case Planner::binary:
        schedule = binary_mpc_schedule(aliveness, cands, config.priority, mb.link, contact,
                                       options.solver, solve_options);
        break;
      case Planner::bipartite:
        schedule = bipartite_schedule(cands, config.priority, mb.link);
        break;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    solve_total += secs;
    m.solve_max_s = std::max(m.solve_max_s, secs);
    ++m.solves;

    const auto next_id = next_action(schedule, cands);
    if (!next_id) {
      UtcTime next = add_hours(t, dt);
      if (auto due = next_due(); due && *due < next) next = *due;
      t = next;
      continue;
    }
    const ContactWindow w =
        *std::find_if(cands.begin(), cands.end(), [&](const ContactWindow& c) { return c.id == *next_id; });
    const auto asset = static_cast<std::size_t>(w.asset);

    step_truth(truth, w.start, modes);
    const ModeId true_mode = truth.assets[asset].mode;
    const double p_link = link_probability(mb.link, w.e_max_deg);
    const Observation obs = observe(true_mode, w.action, p_link, mb.likelihood,
                                    hash_uniform(seed, {stream::kObserve, static_cast<std::uint64_t>(w.id)}));
    if (w.action == contact && obs == Observation::contact && modes[true_mode].responds_to(contact))
      start_intervention(truth, w.asset, w.start, modes);
    if (w.action == recover && true_mode != modes.dead()) {
      const double u = hash_uniform(seed, {stream::kIntervene, static_cast<std::uint64_t>(w.id)});
      if (u < mb.success.probability(recover, modes[true_mode], p_link, mb.likelihood))
        start_intervention(truth, w.asset, w.start, modes);
    }
    pending.push_back({w, true_mode, obs, p_link});
    station_busy[w.station] = w.end;
    asset_busy[asset] = w.end;
    ++m.actions;
    t = std::max(t, w.start);
  }
  apply_due(end);
  step_truth(truth, end, modes);

  for (std::size_t i = 0; i < n; ++i) {
    const AssetTruth& a = truth.assets[i];
    AssetOutcome o;
    o.asset = static_cast<int>(i);
    o.initial_mode = a.initial_mode;
    o.final_mode = a.mode;
    o.acquired = acquired[i] != 0;
    o.acquired_at = acquired_at[i];
    if (a.mode == modes.dead()) o.status = AssetOutcome::Status::lost;
    else if (o.acquired) o.status = AssetOutcome::Status::acquired;
    else o.status = AssetOutcome::Status::unresolved;
    m.acquired += o.status == AssetOutcome::Status::acquired;
    m.lost += o.status == AssetOutcome::Status::lost;
    m.unresolved += o.status == AssetOutcome::Status::unresolved;
    if (modes[a.initial_mode].lethal) {
      ++m.lethal_total;
      m.lethal_recovered += o.status == AssetOutcome::Status::acquired;
    }
    m.outcomes.push_back(o);
  }
  m.overall_pct = n ? 100.0 * m.acquired / static_cast<double>(n) : 0.0;
  if (m.lethal_total > 0) m.lethal_pct = 100.0 * m.lethal_recovered / m.lethal_total;
  m.solve_mean_s = m.solves ? solve_total / m.solves : 0.0;
  emit({{"event", "end"}, {"acquired", m.acquired}, {"lost", m.lost}, {"unresolved", m.unresolved}});
  return m;
}

Stat summarize(std::span<const double> values) {
  Stat s;
  s.n = static_cast<int>(values.size());
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / s.n;
  if (s.n >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.ci95 = 1.96 * std::sqrt(ss / (s.n - 1)) / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

Stat CampaignResult::overall() const {
  std::vector<double> v;
  for (const auto& t : trials) v.push_back(t.overall_pct);
  return summarize(v);
}

Stat CampaignResult::lethal() const {
  std::vector<double> v;
  for (const auto& t : trials)
    if (t.lethal_pct) v.push_back(*t.lethal_pct);
  return summarize(v);
}

Stat CampaignResult::solve_mean() const {
  std::vector<double> v;
  for (const auto& t : trials) v.push_back(t.solve_mean_s);
  return summarize(v);
}

CampaignResult run_campaign(const SimConfig& config, std::span<const ContactWindow> windows,
                            Planner planner, int trials, std::uint64_t base_seed,
                            const CampaignOptions& options) {
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  CampaignResult result;
  result.planner = planner;
  result.base_seed = base_seed;
  result.trials.resize(static_cast<std::size_t>(trials));

  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (int k = next++; k < trials; k = next++) {
      try {
        RunOptions ro{planner, options.solver, nullptr};
        std::ofstream trace;
        if (!options.trace_dir.empty()) {
          char name[64];
          std::snprintf(name, sizeof name, "%s_trial%04d.jsonl", to_string(planner), k);
          trace.open(std::filesystem::path(options.trace_dir) / name);
          if (!trace) throw std::runtime_error(std::string("cannot write trace file ") + name);
          ro.trace = &trace;
        }
        result.trials[static_cast<std::size_t>(k)] = run_trial(config, windows, k, base_seed, ro);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int jobs = std::clamp(options.jobs, 1, trials);
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return result;
}

void write_metrics_csv(std::ostream& out, std::span<const CampaignResult> results) {
  out << kMetricsCsvHeader << '\n';
  for (const CampaignResult& r : results)
    for (const TrialMetrics& t : r.trials)
      out << to_string(r.planner) << ',' << t.trial << ',' << t.seed << ',' << fixed(t.overall_pct)
          << ',' << (t.lethal_pct ? fixed(*t.lethal_pct) : std::string("NA")) << ',' << t.acquired
          << ',' << t.lost << ',' << t.unresolved << ',' << t.lethal_total << ','
          << t.lethal_recovered << ',' << t.actions << ',' << t.solves << '\n';
}

nlohmann::json summary_json(const CampaignResult& r, const ModeSet& modes) {
  int acquired = 0, lost = 0, unresolved = 0, lethal_total = 0, lethal_recovered = 0;
  std::map<std::string, std::array<int, 4>> by_mode;  // assets, acquired, lost, unresolved
  for (const TrialMetrics& t : r.trials) {
    acquired += t.acquired;
    lost += t.lost;
    unresolved += t.unresolved;
    lethal_total += t.lethal_total;
    lethal_recovered += t.lethal_recovered;
    for (const AssetOutcome& o : t.outcomes) {
      auto& row = by_mode[modes[o.initial_mode].name];
      ++row[0];
      ++row[1 + static_cast<int>(o.status)];
    }
  }
  nlohmann::json modes_json = nlohmann::json::object();
  for (const auto& [name, row] : by_mode)
    modes_json[name] = {{"assets", row[0]}, {"acquired", row[1]}, {"lost", row[2]}, {"unresolved", row[3]}};
  return {{"planner", to_string(r.planner)},
          {"trials", r.trials.size()},
          {"base_seed", r.base_seed},
          {"overall_pct", stat_json(r.overall())},
          {"lethal_pct", stat_json(r.lethal())},
          {"totals",
           {{"acquired", acquired},
            {"lost", lost},
            {"unresolved", unresolved},
            {"lethal_total", lethal_total},
            {"lethal_recovered", lethal_recovered}}},
          {"by_initial_mode", modes_json}};
}

void write_timing_csv(std::ostream& out, std::span<const CampaignResult> results) {
  out << kTimingCsvHeader << '\n';
  for (const CampaignResult& r : results)
    for (const TrialMetrics& t : r.trials)
      out << to_string(r.planner) << ',' << t.trial << ',' << t.solves << ','
          << fixed(t.solve_mean_s, 6) << ',' << fixed(t.solve_max_s, 6) << '\n';
}

void write_comparison(std::ostream& out, std::span<const CampaignResult> results) {
  const bool ci = !results.empty() && results.front().trials.size() > 1;
  out << (ci ? "planner,overall_pct,overall_ci95,lethal_pct,lethal_ci95,solve_mean_s\n"
             : "planner,overall_pct,lethal_pct,solve_mean_s\n");
  auto ci_field = [](const Stat& s) { return s.ci95 ? fixed(*s.ci95, 2) : std::string("NA"); };
  for (const CampaignResult& r : results) {
    const Stat o = r.overall(), l = r.lethal(), s = r.solve_mean();
    out << to_string(r.planner) << ',' << fixed(o.mean, 2);
    if (ci) out << ',' << ci_field(o);
    out << ',' << (l.n ? fixed(l.mean, 2) : std::string("NA"));
    if (ci) out << ',' << ci_field(l);
    out << ',' << fixed(s.mean, 4) << '\n';
  }
}

}  // namespace immpc
