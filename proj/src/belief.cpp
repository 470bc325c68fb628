#include "immpc/belief.hpp"

#include <algorithm>
#include <cmath>

namespace immpc {

void check_belief(const Belief& b) {
  if (b.mu.size() == 0) throw std::invalid_argument("empty belief");
  if ((b.mu.array() < 0.0).any()) throw std::invalid_argument("belief has a negative entry");
  if (std::abs(b.mu.sum() - 1.0) > 1e-10) throw std::invalid_argument("belief does not sum to 1");
  if (b.tau < 0.0) throw std::invalid_argument("belief tau must be nonnegative");
}

Belief predict(const Belief& b, const TransitionModel& model) {
  const Eigen::MatrixXd pi = transition_matrix(model, b.tau);
  Belief out = b;
  out.mu = pi.transpose() * b.mu;
  out.mu /= out.mu.sum();
  out.tau = b.tau + model.dt();
  return out;
}

Belief update(const Belief& b, ActionId action, Observation obs, double p_link,
              const LikelihoodTable& table) {
  const auto o = static_cast<std::size_t>(obs);
  Belief out = b;
  for (Eigen::Index m = 0; m < b.mu.size(); ++m) {
    const LikelihoodEntry& e = table.at(static_cast<ModeId>(m), action);
    if (e.positive != obs && e.negative != obs)
      throw std::invalid_argument(std::string("observation ") + to_string(obs) +
                                  " cannot be emitted by action " + std::to_string(action));
    out.mu(m) *= table.row(static_cast<ModeId>(m), action, p_link)[o];
  }
  const double total = out.mu.sum();
  if (!(total > 0.0))
    throw ImpossibleEvidence(std::string("observation ") + to_string(obs) +
                             " has zero probability under the current belief");
  out.mu /= total;
  return out;
}

double entropy(const Eigen::VectorXd& mu) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    if (mu(i) > 0.0) h -= mu(i) * std::log(mu(i));
  return h;
}

double info_gain(const Belief& b, ActionId action, double p_link, const LikelihoodTable& table,
                 const TransitionModel& model, double lead_hours) {
  const double dt = model.dt();
  const double steps = lead_hours > 0.0 ? std::floor(lead_hours / dt + 1e-9) : 0.0;
  const Eigen::MatrixXd pi = transition_matrix(model, b.tau + steps * dt);
  Eigen::VectorXd prior = pi.transpose() * b.mu;
  prior /= prior.sum();

  const auto n = prior.size();
  std::vector<ObservationVector> rows(static_cast<std::size_t>(n));
  for (Eigen::Index m = 0; m < n; ++m)
    rows[static_cast<std::size_t>(m)] = table.row(static_cast<ModeId>(m), action, p_link);

  // Mutual-information form. A symbol whose likelihood is the same for every
  // mode in the support carries nothing, and contributes exactly zero here;
  // the H(prior) - E[H(post)] form leaves rounding residue instead.
  double gain = 0.0;
  for (std::size_t o = 0; o < kObservationCount; ++o) {
    double p_o = 0.0;
    bool flat = true;
    double first = -1.0;
    for (Eigen::Index m = 0; m < n; ++m) {
      if (prior(m) <= 0.0) continue;
      const double l = rows[static_cast<std::size_t>(m)][o];
      p_o += prior(m) * l;
      if (first < 0.0) first = l;
      else if (l != first) flat = false;
    }
    if (p_o <= 0.0 || flat) continue;
    for (Eigen::Index m = 0; m < n; ++m) {
      const double l = rows[static_cast<std::size_t>(m)][o];
      if (prior(m) > 0.0 && l > 0.0) gain += prior(m) * l * std::log(l / p_o);
    }
  }
  return std::max(0.0, gain);
}

double init_tau(const OnsetPrior& onset, Rng& rng) {
  const double t_onset = onset.dist.sample_hours(rng);
  return std::max(0.0, onset.t_op - t_onset);
}

bool is_acquired(const Belief& b, ModeId ok, double theta) { return b.mu(ok) > theta; }

Belief intervene(const Belief& b, std::span<const double> success, ModeId ok) {
  if (success.size() != static_cast<std::size_t>(b.mu.size()))
    throw std::invalid_argument("intervention success vector has wrong length");
  Belief out = b;
  double moved = 0.0;
  for (Eigen::Index m = 0; m < b.mu.size(); ++m) {
    if (m == ok) continue;
    const double s = std::clamp(success[static_cast<std::size_t>(m)], 0.0, 1.0);
    moved += s * b.mu(m);
    out.mu(m) = (1.0 - s) * b.mu(m);
  }
  out.mu(ok) += moved;
  out.mu /= out.mu.sum();
  return out;
}

nlohmann::json to_json(const Belief& b, const ModeSet& modes) {
  nlohmann::json mu = nlohmann::json::object();
  for (const FaultMode& m : modes.modes()) mu[m.name] = b.mu(m.id);
  return {{"asset", b.asset}, {"tau", b.tau}, {"mu", mu}};
}

}  // namespace immpc
