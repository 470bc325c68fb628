#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "immpc/belief.hpp"
#include "immpc/scenario.hpp"
#include "immpc/schedule.hpp"

namespace immpc {

// Scenario MILP over binary window selections. The per-(asset, scenario)
// acquisition variables are eliminated: at the optimum they equal
// min(1, sum of z over the asset's selected windows).
struct ScheduleProblem {
  std::vector<ContactWindow> windows;
  std::vector<std::vector<std::uint8_t>> z;  // [window][scenario], aligned with windows
  std::vector<double> info;                  // Delta H per window
  std::vector<double> q;                     // priority, indexed by asset id
  double lambda = 0.0;
  std::vector<std::vector<int>> cliques;     // indices into windows; at most one selected each
  int scenarios = 1;

  void validate() const;  // throws std::invalid_argument
};

enum class SolverKind { exact, greedy };

SolverKind solver_from_string(std::string_view s);
const char* to_string(SolverKind k);

struct SolveOptions {
  std::size_t exact_limit = 64;
  std::uint64_t node_limit = 10'000'000;
};

// Pairwise cliques: windows at one station with overlapping intervals, and
// windows of one asset with overlapping intervals.
std::vector<std::vector<int>> exclusion_cliques(std::span<const ContactWindow> windows);

struct InfoContext {
  const LinkModel& link;
  const LikelihoodTable& likelihood;
  const TransitionModel& model;
};

// Throws std::invalid_argument if a window has no z row in the scenario set
// or its asset has no belief. `now` anchors the info-gain lead time.
ScheduleProblem build_problem(std::span<const Belief> beliefs,
                              std::span<const ContactWindow> windows, const ScenarioSet& scenarios,
                              const InfoContext& ctx, std::span<const double> q, double lambda,
                              UtcTime now);

// Objective decomposition for the given window indices.
Schedule evaluate(const ScheduleProblem& problem, std::span<const int> indices);
bool is_feasible(const ScheduleProblem& problem, std::span<const int> indices);

// Branch-and-bound over x. Among optimal selections in which every window
// contributes, returns the one whose sorted id list is lexicographically
// smallest. Throws std::invalid_argument when |W| exceeds exact_limit. If the
// node limit is hit the incumbent is returned with proven_optimal = false.
Schedule solve_exact(const ScheduleProblem& problem, const SolveOptions& options = {});

Schedule solve_greedy(const ScheduleProblem& problem);

// solve_exact when it applies, greedy otherwise.
Schedule solve(const ScheduleProblem& problem, SolverKind kind, const SolveOptions& options = {});

// Copies each contact window of an asset whose lethal-mode belief mass
// exceeds `threshold` as a recover window. New ids start at `first_id`.
std::vector<ContactWindow> synthesize_recover_windows(std::span<const Belief> beliefs,
                                                      std::span<const ContactWindow> windows,
                                                      const ModeSet& modes, ActionId contact,
                                                      ActionId recover, double threshold,
                                                      int first_id);

nlohmann::json to_json(const ScheduleProblem& problem, const ActionSet& actions);
nlohmann::json to_json(const Schedule& schedule);

}  // namespace immpc
