#include "immpc/baselines.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace immpc {

std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weights) {
  const std::size_t rows = weights.size();
  std::size_t cols = 0;
  for (const auto& r : weights) cols = std::max(cols, r.size());
  if (rows == 0 || cols == 0) return std::vector<int>(rows, -1);
  const std::size_t n = std::max(rows, cols);

  double top = 0.0;
  for (const auto& r : weights)
    for (double w : r) top = std::max(top, w);
  // Min-cost form on a padded square matrix; 1-based potentials.
  auto cost = [&](std::size_t i, std::size_t j) {
    double w = 0.0;
    if (i < rows && j < weights[i].size()) w = std::max(0.0, weights[i][j]);
    return top - w;
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> out(rows, -1);
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t i = p[j] - 1;
    const std::size_t c = j - 1;
    if (i < rows && c < weights[i].size() && weights[i][c] > 0.0) out[i] = static_cast<int>(c);
  }
  return out;
}

AlivenessState initial_aliveness(std::size_t assets, double p_alive) {
  if (!(p_alive >= 0.0 && p_alive <= 1.0)) throw std::invalid_argument("p_alive must lie in [0,1]");
  return AlivenessState{std::vector<double>(assets, p_alive)};
}

double binary_update(double p_alive, ActionId action, Observation obs, double p_link,
                     const LikelihoodTable& table, const ModeSet& modes) {
  if (p_alive <= 0.0) return 0.0;
  const LikelihoodEntry* alive = table.find(modes.ok(), action);
  const LikelihoodEntry* dead = table.find(modes.dead(), action);
  if (!alive || !dead) return p_alive;
  const double la = table.row(modes.ok(), action, p_link)[static_cast<std::size_t>(obs)];
  const double ld = table.row(modes.dead(), action, p_link)[static_cast<std::size_t>(obs)];
  const double den = p_alive * la + (1.0 - p_alive) * ld;
  if (den <= 0.0) return p_alive;
  return std::clamp(p_alive * la / den, 0.0, 1.0);
}

void binary_update(AlivenessState& state, int asset, ActionId action, Observation obs,
                   double p_link, const LikelihoodTable& table, const ModeSet& modes) {
  double& p = state.p_alive.at(static_cast<std::size_t>(asset));
  p = binary_update(p, action, obs, p_link, table, modes);
}

Schedule bipartite_schedule(std::span<const ContactWindow> windows, std::span<const double> q,
                            const LinkModel& link) {
  Schedule out;
  out.proven_optimal = true;
  const std::size_t n = windows.size();
  if (n == 0) return out;

  // Union-find over same-station overlaps.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const ContactWindow& a = windows[i];
      const ContactWindow& b = windows[j];
      if (a.station == b.station && a.start < b.end && b.start < a.end) {
        const std::size_t ra = find(i), rb = find(j);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
      }
    }

  std::map<std::size_t, int> group_of_root;
  std::map<int, int> row_of_asset;
  for (std::size_t i = 0; i < n; ++i) {
    group_of_root.emplace(find(i), static_cast<int>(group_of_root.size()));
    row_of_asset.emplace(windows[i].asset, 0);
  }
  int r = 0;
  for (auto& [asset, row] : row_of_asset) row = r++;

  const std::size_t rows = row_of_asset.size();
  const std::size_t cols = group_of_root.size();
  std::vector<std::vector<double>> weight(rows, std::vector<double>(cols, 0.0));
  std::vector<std::vector<const ContactWindow*>> pick(rows, std::vector<const ContactWindow*>(cols));
  for (std::size_t i = 0; i < n; ++i) {
    const ContactWindow& w = windows[i];
    const auto row = static_cast<std::size_t>(row_of_asset.at(w.asset));
    const auto col = static_cast<std::size_t>(group_of_root.at(find(i)));
    const double value = q[static_cast<std::size_t>(w.asset)] * link_probability(link, w.e_max_deg);
    const ContactWindow*& cur = pick[row][col];
    if (!cur || value > weight[row][col] || (value == weight[row][col] && w.id < cur->id)) {
      weight[row][col] = value;
      cur = &w;
    }
  }
  const std::vector<int> match = max_weight_assignment(weight);
  for (std::size_t row = 0; row < rows; ++row) {
    if (match[row] < 0) continue;
    const auto col = static_cast<std::size_t>(match[row]);
    out.selected.push_back(pick[row][col]->id);
    out.value_term += weight[row][col];
  }
  std::sort(out.selected.begin(), out.selected.end());
  out.objective = out.value_term;
  return out;
}

ScheduleProblem binary_mpc_problem(const AlivenessState& state,
                                   std::span<const ContactWindow> windows,
                                   std::span<const double> q, const LinkModel& link,
                                   ActionId contact) {
  ScheduleProblem p;
  p.scenarios = 1;
  p.lambda = 0.0;
  p.q.assign(q.size(), 0.0);
  for (std::size_t a = 0; a < q.size() && a < state.p_alive.size(); ++a)
    p.q[a] = q[a] * state.p_alive[a];
  for (const ContactWindow& w : windows) {
    if (w.action != contact) continue;
    const double alive = state.p_alive.at(static_cast<std::size_t>(w.asset));
    if (alive <= 0.0) continue;
    p.windows.push_back(w);
    p.z.push_back({static_cast<std::uint8_t>(alive * link_probability(link, w.e_max_deg) >= 0.5)});
    p.info.push_back(0.0);
  }
  p.cliques = exclusion_cliques(p.windows);
  p.validate();
  return p;
}

Schedule binary_mpc_schedule(const AlivenessState& state, std::span<const ContactWindow> windows,
                             std::span<const double> q, const LinkModel& link, ActionId contact,
                             SolverKind kind, const SolveOptions& options) {
  return solve(binary_mpc_problem(state, windows, q, link, contact), kind, options);
}

}  // namespace immpc
