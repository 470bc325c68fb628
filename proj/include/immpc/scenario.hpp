#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "immpc/belief.hpp"
#include "immpc/geometry.hpp"
#include "immpc/schedule.hpp"

namespace immpc {

// p_succ(action, mode). An unset entry means "use the likelihood of the
// action's positive symbol" (contact on OK gives p_link, on GNC p_link*gamma);
// set entries are fixed probabilities. Modes outside the action's responsive
// set never succeed.
class SuccessModel {
 public:
  SuccessModel() = default;
  SuccessModel(std::size_t modes, std::size_t actions);

  // contact -> likelihood, beacon -> 0, recover -> GNC/COMMS 0.9, DEP 0.5.
  static SuccessModel leop(const ModeSet& modes, const ActionSet& actions);

  void set_fixed(ActionId a, ModeId m, double p);
  void set_from_likelihood(ActionId a, ModeId m);
  double probability(ActionId a, const FaultMode& mode, double p_link,
                     const LikelihoodTable& table) const;

 private:
  std::size_t modes_ = 0;
  std::size_t actions_ = 0;
  std::vector<std::optional<double>> fixed_;
};

struct ScenarioSet {
  int scenarios = 0;
  int steps = 0;          // horizon steps H; trajectories have H + 1 entries
  double dt = 0.25;       // hours
  UtcTime t0{};           // time of trajectory step 0
  std::uint64_t seed = 0;
  std::vector<int> assets;                            // asset ids, belief order
  std::vector<std::vector<std::vector<ModeId>>> trajectories;  // [scenario][asset][step]
  std::unordered_map<int, std::vector<std::uint8_t>> z;        // window id -> per-scenario

  int asset_index(int asset_id) const;  // throws std::out_of_range
  int step_of(UtcTime t) const;         // floor((t - t0)/dt) clamped to [0, steps]
  ModeId mode_at(int scenario, int asset_id, UtcTime t) const;
};

// Largest-remainder allocation of S draws proportional to mu; ties go to the
// lower mode index.
std::vector<int> stratified_counts(const Eigen::VectorXd& mu, int S);

ScenarioSet sample_trajectories(std::span<const Belief> beliefs, const TransitionModel& model,
                                int horizon_steps, int scenarios, std::uint64_t seed,
                                UtcTime t0 = {});

struct OutcomeContext {
  const ModeSet& modes;
  const LinkModel& link;
  const LikelihoodTable& likelihood;
  const SuccessModel& success;
};

ScenarioSet sample_outcomes(ScenarioSet set, std::span<const ContactWindow> windows,
                            const OutcomeContext& ctx, std::uint64_t seed);

// (1/S) sum_s sum_i q_i min(1, sum of z over the asset's selected windows).
// q is indexed by asset id.
double estimate_value(const ScenarioSet& set, std::span<const ContactWindow> windows,
                      const Schedule& schedule, std::span<const double> q);

nlohmann::json to_json(const ScenarioSet& set);

}  // namespace immpc
