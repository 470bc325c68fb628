#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "immpc/baselines.hpp"
#include "immpc/config.hpp"

namespace immpc {

enum class Planner { imm, binary, bipartite };

Planner planner_from_string(std::string_view s);  // throws std::invalid_argument
const char* to_string(Planner p);
inline constexpr std::array<Planner, 3> kAllPlanners{Planner::bipartite, Planner::binary, Planner::imm};

struct AssetTruth {
  ModeId initial_mode = 0;
  ModeId mode = 0;
  std::optional<UtcTime> t_death;             // lethal modes only
  double recovery_minutes = 0.0;              // R_f, faulted assets only
  std::optional<UtcTime> intervention_start;  // first successful intervention
  std::optional<UtcTime> resolved_at;         // recovery or death time
};

struct FleetTruth {
  std::vector<AssetTruth> assets;
  UtcTime now{};

  bool alive(int asset, const ModeSet& modes) const {
    return assets.at(static_cast<std::size_t>(asset)).mode != modes.dead();
  }
};

// Largest-remainder split of n into nominal / dead / faulted counts.
std::array<int, 3> composition_counts(int n, const Composition& c);

// Truth depends only on (config, trial_seed), never on the planner.
FleetTruth init_truth(const SimConfig& config, std::uint64_t trial_seed);

// Advances to t. An intervention accrues continuously from its first success;
// the asset returns to OK once R_f has elapsed unless its death time comes
// first. Lethal assets without a completed intervention die at t_death.
void step_truth(FleetTruth& truth, UtcTime t, const ModeSet& modes);

// Marks the start of an intervention on a faulted asset (no-op otherwise).
void start_intervention(FleetTruth& truth, int asset, UtcTime at, const ModeSet& modes);

Observation observe(ModeId true_mode, ActionId action, double p_link, const LikelihoodTable& table,
                    double u);

struct AssetOutcome {
  int asset = 0;
  ModeId initial_mode = 0;
  ModeId final_mode = 0;
  bool acquired = false;              // acquisition fired
  std::optional<UtcTime> acquired_at;
  enum class Status { acquired, lost, unresolved } status = Status::unresolved;
};

const char* to_string(AssetOutcome::Status s);

struct TrialMetrics {
  int trial = 0;
  std::uint64_t seed = 0;
  int assets = 0;
  int acquired = 0;
  int lost = 0;
  int unresolved = 0;
  int lethal_total = 0;
  int lethal_recovered = 0;
  int actions = 0;
  int solves = 0;
  double overall_pct = 0.0;
  std::optional<double> lethal_pct;   // empty when no asset started in a lethal mode
  double solve_mean_s = 0.0;          // wall clock, not deterministic
  double solve_max_s = 0.0;
  std::vector<AssetOutcome> outcomes;
};

struct RunOptions {
  Planner planner = Planner::imm;
  SolverKind solver = SolverKind::exact;
  std::ostream* trace = nullptr;  // JSON lines
};

std::uint64_t trial_seed(std::uint64_t base_seed, int trial);

// Contact and beacon windows over the whole campaign; shared by every trial
// and planner.
std::vector<ContactWindow> campaign_windows(const SimConfig& config);

TrialMetrics run_trial(const SimConfig& config, std::span<const ContactWindow> windows,
                       int trial, std::uint64_t base_seed, const RunOptions& options);

struct Stat {
  double mean = 0.0;
  std::optional<double> ci95;  // 1.96 * sd / sqrt(n); empty for n < 2
  int n = 0;
};

Stat summarize(std::span<const double> values);

struct CampaignResult {
  Planner planner = Planner::imm;
  std::uint64_t base_seed = 0;
  std::vector<TrialMetrics> trials;  // ordered by trial index

  Stat overall() const;
  Stat lethal() const;   // over trials with at least one lethal asset
  Stat solve_mean() const;
};

struct CampaignOptions {
  SolverKind solver = SolverKind::exact;
  int jobs = 1;
  std::string trace_dir;  // empty: no traces
};

CampaignResult run_campaign(const SimConfig& config, std::span<const ContactWindow> windows,
                            Planner planner, int trials, std::uint64_t base_seed,
                            const CampaignOptions& options = {});

// Deterministic outputs: no wall-clock fields.
inline constexpr const char* kMetricsCsvHeader =
    "planner,trial,seed,overall_pct,lethal_pct,acquired,lost,unresolved,lethal_total,"
    "lethal_recovered,actions,solves";
void write_metrics_csv(std::ostream& out, std::span<const CampaignResult> results);
nlohmann::json summary_json(const CampaignResult& result, const ModeSet& modes);

inline constexpr const char* kTimingCsvHeader = "planner,trial,solves,solve_mean_s,solve_max_s";
void write_timing_csv(std::ostream& out, std::span<const CampaignResult> results);

// Tables 3/4-shaped comparison; CI columns only when trials > 1.
void write_comparison(std::ostream& out, std::span<const CampaignResult> results);

}  // namespace immpc
