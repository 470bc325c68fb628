#pragma once

#include <span>
#include <utility>
#include <vector>

#include "immpc/observation_model.hpp"
#include "immpc/scheduler.hpp"

namespace immpc {

// Maximum-weight assignment of rows to columns (rectangular allowed). Returns
// the column assigned to each row, or -1. Pairs with weight <= 0 are dropped.
std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weights);

// Scalar aliveness per asset id.
struct AlivenessState {
  std::vector<double> p_alive;
};

AlivenessState initial_aliveness(std::size_t assets, double p_alive);

// Two-hypothesis Bayes with the OK row as the alive likelihood and the DEAD
// row as the dead likelihood. Unknown rows and zero evidence leave p unchanged.
double binary_update(double p_alive, ActionId action, Observation obs, double p_link,
                     const LikelihoodTable& table, const ModeSet& modes);
void binary_update(AlivenessState& state, int asset, ActionId action, Observation obs,
                   double p_link, const LikelihoodTable& table, const ModeSet& modes);

// Groups windows that overlap at the same station (connected components) and
// matches assets to groups with weight q_i * p_link(w). Within a group an
// asset uses its best window; ties go to the smaller id.
Schedule bipartite_schedule(std::span<const ContactWindow> windows, std::span<const double> q,
                            const LinkModel& link);

// Single-scenario problem: contact windows only, z = 1[p_alive * p_link >= 0.5],
// value weights q_i * p_alive, no information term.
ScheduleProblem binary_mpc_problem(const AlivenessState& state,
                                   std::span<const ContactWindow> windows,
                                   std::span<const double> q, const LinkModel& link,
                                   ActionId contact);

Schedule binary_mpc_schedule(const AlivenessState& state, std::span<const ContactWindow> windows,
                             std::span<const double> q, const LinkModel& link, ActionId contact,
                             SolverKind kind = SolverKind::exact, const SolveOptions& options = {});

}  // namespace immpc
