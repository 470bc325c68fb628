#include "immpc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace immpc {

SuccessModel::SuccessModel(std::size_t modes, std::size_t actions)
    : modes_(modes), actions_(actions), fixed_(modes * actions) {}

SuccessModel SuccessModel::leop(const ModeSet& modes, const ActionSet& actions) {
  SuccessModel s(modes.size(), actions.size());
  const ActionId contact = actions.index_of("contact");
  const ActionId beacon = actions.index_of("beacon");
  for (const FaultMode& m : modes.modes()) {
    s.set_from_likelihood(contact, m.id);
    s.set_fixed(beacon, m.id, 0.0);
  }
  if (auto recover = actions.find("recover")) {
    for (const FaultMode& m : modes.modes()) s.set_fixed(*recover, m.id, 0.0);
    s.set_fixed(*recover, modes.index_of("GNC"), 0.9);
    s.set_fixed(*recover, modes.index_of("COMMS"), 0.9);
    s.set_fixed(*recover, modes.index_of("DEP"), 0.5);
  }
  return s;
}

void SuccessModel::set_fixed(ActionId a, ModeId m, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ModelError("success probability must lie in [0,1]");
  fixed_.at(static_cast<std::size_t>(a) * modes_ + static_cast<std::size_t>(m)) = p;
}

void SuccessModel::set_from_likelihood(ActionId a, ModeId m) {
  fixed_.at(static_cast<std::size_t>(a) * modes_ + static_cast<std::size_t>(m)).reset();
}

double SuccessModel::probability(ActionId a, const FaultMode& mode, double p_link,
                                 const LikelihoodTable& table) const {
  if (!mode.responds_to(a)) return 0.0;
  const auto& f = fixed_.at(static_cast<std::size_t>(a) * modes_ + static_cast<std::size_t>(mode.id));
  if (f) return *f;
  const LikelihoodEntry& e = table.at(mode.id, a);
  return table.row(mode.id, a, p_link)[static_cast<std::size_t>(e.positive)];
}

int ScenarioSet::asset_index(int asset_id) const {
  for (std::size_t i = 0; i < assets.size(); ++i)
    if (assets[i] == asset_id) return static_cast<int>(i);
  throw std::out_of_range("asset " + std::to_string(asset_id) + " is not in the scenario set");
}

int ScenarioSet::step_of(UtcTime t) const {
  const double h = hours_between(t0, t);
  if (h <= 0.0) return 0;
  const int k = static_cast<int>(std::floor(h / dt + 1e-9));
  return std::min(k, steps);
}

ModeId ScenarioSet::mode_at(int scenario, int asset_id, UtcTime t) const {
  return trajectories.at(static_cast<std::size_t>(scenario))
      .at(static_cast<std::size_t>(asset_index(asset_id)))
      .at(static_cast<std::size_t>(step_of(t)));
}

std::vector<int> stratified_counts(const Eigen::VectorXd& mu, int S) {
  const auto n = static_cast<std::size_t>(mu.size());
  std::vector<int> counts(n);
  std::vector<double> frac(n);
  const double total = mu.sum();
  int assigned = 0;
  for (std::size_t m = 0; m < n; ++m) {
    const double share = S * mu(static_cast<Eigen::Index>(m)) / total;
    counts[m] = static_cast<int>(std::floor(share + 1e-12));
    frac[m] = share - counts[m];
    assigned += counts[m];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t k = 0; assigned < S && k < n; ++k, ++assigned) ++counts[order[k]];
  return counts;
}

ScenarioSet sample_trajectories(std::span<const Belief> beliefs, const TransitionModel& model,
                                int horizon_steps, int scenarios, std::uint64_t seed, UtcTime t0) {
  if (horizon_steps < 1 || scenarios < 1)
    throw std::invalid_argument("sample_trajectories needs H >= 1 and S >= 1");
  ScenarioSet set;
  set.scenarios = scenarios;
  set.steps = horizon_steps;
  set.dt = model.dt();
  set.t0 = t0;
  set.seed = seed;
  const auto S = static_cast<std::size_t>(scenarios);
  const auto H = static_cast<std::size_t>(horizon_steps);
  const auto n_modes = static_cast<std::size_t>(model.modes().size());
  set.trajectories.assign(S, std::vector<std::vector<ModeId>>(beliefs.size(),
                                                              std::vector<ModeId>(H + 1)));

  std::vector<Eigen::MatrixXd> mats(H + 1);
  for (std::size_t a = 0; a < beliefs.size(); ++a) {
    const Belief& b = beliefs[a];
    set.assets.push_back(b.asset);
    const auto asset_tag = static_cast<std::uint64_t>(b.asset);

    const std::vector<int> counts = stratified_counts(b.mu, scenarios);
    std::vector<ModeId> initial;
    initial.reserve(S);
    for (std::size_t m = 0; m < counts.size(); ++m)
      initial.insert(initial.end(), static_cast<std::size_t>(counts[m]), static_cast<ModeId>(m));
    Rng strat = make_stream(seed, {stream::kStratify, asset_tag});
    shuffle(strat, initial);

    for (std::size_t t = 1; t <= H; ++t)
      mats[t] = transition_matrix(model, b.tau + static_cast<double>(t) * model.dt());

    for (std::size_t s = 0; s < S; ++s) {
      Rng rng = make_stream(seed, {stream::kScenario, s, asset_tag});
      auto& traj = set.trajectories[s][a];
      traj[0] = initial[s];
      for (std::size_t t = 1; t <= H; ++t) {
        const auto row = mats[t].row(traj[t - 1]);
        traj[t] = static_cast<ModeId>(categorical(rng, row, n_modes));
      }
    }
  }
  return set;
}

ScenarioSet sample_outcomes(ScenarioSet set, std::span<const ContactWindow> windows,
                            const OutcomeContext& ctx, std::uint64_t seed) {
  if (set.trajectories.empty()) throw std::invalid_argument("sample_outcomes needs trajectories");
  const ModeId dead = ctx.modes.dead();
  for (const ContactWindow& w : windows) {
    const int ai = set.asset_index(w.asset);
    const int step = set.step_of(w.start);
    const double p_link = link_probability(ctx.link, w.e_max_deg);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(set.scenarios), 0);
    for (int s = 0; s < set.scenarios; ++s) {
      const ModeId m = set.trajectories[static_cast<std::size_t>(s)][static_cast<std::size_t>(ai)]
                                       [static_cast<std::size_t>(step)];
      if (m == dead) continue;
      const double p = ctx.success.probability(w.action, ctx.modes[m], p_link, ctx.likelihood);
      if (p <= 0.0) continue;
      const double u = hash_uniform(seed, {stream::kOutcome, static_cast<std::uint64_t>(s),
                                           static_cast<std::uint64_t>(w.id)});
      bits[static_cast<std::size_t>(s)] = u < p ? 1 : 0;
    }
    set.z[w.id] = std::move(bits);
  }
  return set;
}

double estimate_value(const ScenarioSet& set, std::span<const ContactWindow> windows,
                      const Schedule& schedule, std::span<const double> q) {
  if (schedule.selected.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t a = 0; a < set.assets.size(); ++a) {
    const int asset = set.assets[a];
    std::vector<const std::vector<std::uint8_t>*> rows;
    for (const ContactWindow& w : windows) {
      if (w.asset != asset) continue;
      if (!std::binary_search(schedule.selected.begin(), schedule.selected.end(), w.id)) continue;
      rows.push_back(&set.z.at(w.id));
    }
    if (rows.empty()) continue;
    int covered = 0;
    for (int s = 0; s < set.scenarios; ++s) {
      for (const auto* r : rows) {
        if ((*r)[static_cast<std::size_t>(s)]) {
          ++covered;
          break;
        }
      }
    }
    total += q[static_cast<std::size_t>(asset)] * covered;
  }
  return total / set.scenarios;
}

nlohmann::json to_json(const ScenarioSet& set) {
  nlohmann::json z = nlohmann::json::object();
  std::vector<int> ids;
  for (const auto& [id, _] : set.z) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  for (int id : ids) z[std::to_string(id)] = set.z.at(id);
  return {{"scenarios", set.scenarios}, {"steps", set.steps},   {"dt", set.dt},
          {"t0", format_iso8601(set.t0)}, {"seed", set.seed},    {"assets", set.assets},
          {"trajectories", set.trajectories}, {"z", z}};
}

}  // namespace immpc
