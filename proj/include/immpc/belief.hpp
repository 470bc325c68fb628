#pragma once

#include <span>
#include <stdexcept>

#include <Eigen/Dense>
#include <json.hpp>

#include "immpc/fault_model.hpp"
#include "immpc/observation_model.hpp"

namespace immpc {

// Per-asset belief over the mode set. tau is the elapsed time (hours) the
// asset has spent in its current mode; it is tracked per asset, not per mode.
struct Belief {
  Eigen::VectorXd mu;
  double tau = 0.0;
  int asset = 0;
};

class ImpossibleEvidence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws std::invalid_argument unless mu is a probability vector (tol 1e-10)
// and tau >= 0.
void check_belief(const Belief& b);

Belief predict(const Belief& b, const TransitionModel& model);

// Bayes update. Throws std::invalid_argument when the observation is not one
// the action can emit and ImpossibleEvidence when its total likelihood is 0.
Belief update(const Belief& b, ActionId action, Observation obs, double p_link,
              const LikelihoodTable& table);

double entropy(const Eigen::VectorXd& mu);
inline double entropy(const Belief& b) { return entropy(b.mu); }

// Expected entropy reduction of a single window. The belief is first
// predicted once with the transition matrix at tau + floor(lead/dt)*dt.
double info_gain(const Belief& b, ActionId action, double p_link, const LikelihoodTable& table,
                 const TransitionModel& model, double lead_hours = 0.0);

struct OnsetPrior {
  BoundedDistribution dist;  // onset time, hours since activation
  double t_op = 0.0;         // hours since activation
};

double init_tau(const OnsetPrior& onset, Rng& rng);

bool is_acquired(const Belief& b, ModeId ok, double theta);

// Moves success[m] of each mode's mass to the nominal mode: the belief-side
// effect of an intervention that succeeds with mode-dependent probability.
Belief intervene(const Belief& b, std::span<const double> success, ModeId ok);

nlohmann::json to_json(const Belief& b, const ModeSet& modes);

}  // namespace immpc
