// immpc: contact windows, Monte Carlo campaigns and planner comparisons.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "immpc/config.hpp"
#include "immpc/sim.hpp"

#ifndef IMMPC_GIT_DESCRIBE
#define IMMPC_GIT_DESCRIBE "unknown"
#endif

namespace fs = std::filesystem;
using namespace immpc;

namespace {

constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::mutex log_mutex;

void log(const std::string& line) {
  std::lock_guard lock(log_mutex);
  std::cerr << line << '\n';
}

std::string now_utc() {
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::system_clock::now().time_since_epoch());
  return format_iso8601(UtcTime{ms.count()});
}

void prepare_out_dir(const fs::path& out, bool force) {
  if (fs::exists(out)) {
    if (!fs::is_directory(out)) throw UsageError(out.string() + " exists and is not a directory");
    if (!fs::is_empty(out) && !force)
      throw UsageError(out.string() + " is not empty; pass --force to overwrite");
  }
  fs::create_directories(out);
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& fn) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  fn(out);
}

struct CampaignArgs {
  std::string config;
  std::string planner = "imm";
  int trials = 10;
  std::uint64_t seed = 1;
  std::string out;
  bool trace = false;
  bool force = false;
  std::string solver = "exact";
  int jobs = 0;
};

nlohmann::json manifest(const std::string& command, const CampaignArgs& a, const SimConfig& config,
                        const std::vector<Planner>& planners) {
  nlohmann::json names = nlohmann::json::array();
  for (Planner p : planners) names.push_back(to_string(p));
  return {{"command", command},
          {"config_path", fs::absolute(a.config).string()},
          {"config", config.source},
          {"planners", names},
          {"trials", a.trials},
          {"seed", a.seed},
          {"solver", a.solver},
          {"trace", a.trace},
          {"out", a.out},
          {"git_describe", IMMPC_GIT_DESCRIBE},
          {"started_utc", now_utc()}};
}

int run_campaigns(const std::string& command, const CampaignArgs& a, std::vector<Planner> planners) {
  const SimConfig config = load_config(a.config);
  const SolverKind solver = solver_from_string(a.solver);
  const fs::path out(a.out);
  prepare_out_dir(out, a.force);

  nlohmann::json m = manifest(command, a, config, planners);
  write_json(out / "manifest.json", m);

  const auto windows = campaign_windows(config);
  write_file(out / "windows.csv", [&](std::ostream& os) { write_windows(os, windows, config.model.actions); });
  log(command + ": " + std::to_string(windows.size()) + " windows over " +
      std::to_string(config.duration_hours) + " h");

  CampaignOptions options;
  options.solver = solver;
  options.jobs = a.jobs > 0 ? a.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (a.trace) {
    options.trace_dir = (out / "trace").string();
    fs::create_directories(options.trace_dir);
  }

  std::vector<CampaignResult> results;
  for (Planner p : planners) {
    const auto t0 = std::chrono::steady_clock::now();
    results.push_back(run_campaign(config, windows, p, a.trials, a.seed, options));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const Stat o = results.back().overall(), l = results.back().lethal();
    char line[256];
    std::snprintf(line, sizeof line, "%s: %d trials in %.1f s, overall %.1f%%, lethal recovery %.1f%%",
                  to_string(p), a.trials, secs, o.mean, l.mean);
    log(line);
  }

  write_file(out / "metrics.csv", [&](std::ostream& os) { write_metrics_csv(os, results); });
  write_file(out / "timing.csv", [&](std::ostream& os) { write_timing_csv(os, results); });
  if (results.size() == 1) {
    write_json(out / "summary.json", summary_json(results.front(), config.model.modes));
  } else {
    nlohmann::json s = nlohmann::json::object();
    for (const auto& r : results) s[to_string(r.planner)] = summary_json(r, config.model.modes);
    write_json(out / "summary.json", s);
    write_file(out / "comparison.csv", [&](std::ostream& os) { write_comparison(os, results); });
    write_comparison(std::cout, results);
  }
  m["finished_utc"] = now_utc();
  write_json(out / "manifest.json", m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IMM-MPC fleet acquisition scheduling"};
  app.require_subcommand(1);

  std::string win_config, win_out;
  std::optional<double> win_horizon, win_step;
  auto* windows_cmd = app.add_subcommand("windows", "Generate contact windows for a config");
  windows_cmd->add_option("--config", win_config, "Scenario config")->required();
  windows_cmd->add_option("--out", win_out, "Output CSV")->required();
  windows_cmd->add_option("--horizon", win_horizon, "Horizon in hours (default: config duration)")
      ->check(CLI::NonNegativeNumber);
  windows_cmd->add_option("--step", win_step, "Scan step in seconds")->check(CLI::Range(0.001, 30.0));

  CampaignArgs run_args, cmp_args;
  auto add_common = [](CLI::App* cmd, CampaignArgs& a) {
    cmd->add_option("--config", a.config, "Scenario config")->required();
    cmd->add_option("--trials", a.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", a.seed, "Base seed");
    cmd->add_option("--out", a.out, "Output directory")->required();
    cmd->add_flag("--trace", a.trace, "Write per-trial JSON-lines traces");
    cmd->add_flag("--force", a.force, "Allow writing into a non-empty output directory");
    cmd->add_option("--solver", a.solver, "Scheduler for MILP planners")
        ->check(CLI::IsMember({"exact", "greedy"}));
    cmd->add_option("--jobs", a.jobs, "Worker threads (default: hardware concurrency)")
        ->check(CLI::NonNegativeNumber);
  };
  auto* run_cmd = app.add_subcommand("run", "Run a campaign with one planner");
  add_common(run_cmd, run_args);
  run_cmd->add_option("--planner", run_args.planner, "imm, binary or bipartite")
      ->check(CLI::IsMember({"imm", "binary", "bipartite"}));
  auto* cmp_cmd = app.add_subcommand("compare", "Run all planners on paired seeds");
  add_common(cmp_cmd, cmp_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*windows_cmd) {
      SimConfig config = load_config(win_config);
      if (win_horizon) config.duration_hours = *win_horizon;
      if (win_step) config.step_seconds = *win_step;
      const auto windows = campaign_windows(config);
      const fs::path out(win_out);
      if (out.has_parent_path()) fs::create_directories(out.parent_path());
      write_windows(out, windows, config.model.actions);
      log("windows: " + std::to_string(windows.size()) + " written to " + out.string());
      return 0;
    }
    if (*run_cmd) return run_campaigns("run", run_args, {planner_from_string(run_args.planner)});
    if (*cmp_cmd)
      return run_campaigns("compare", cmp_args, {kAllPlanners.begin(), kAllPlanners.end()});
  } catch (const ConfigError& e) {
    log(std::string("error: ") + e.what());
    return kUsageError;
  } catch (const UsageError& e) {
    log(std::string("error: ") + e.what());
    return kUsageError;
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return kRuntimeError;
  }
  return kUsageError;
}
