#pragma once

// Slow, independent reference implementations used only by tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <numeric>
#include <vector>

#include "immpc/geometry.hpp"
#include "immpc/scheduler.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

// Posterior over the final mode of an HMM by summing over every mode path.
// step t moves with trans[t] and then emits with likelihood lik[t][mode].
inline std::vector<double> hmm_posterior(const std::vector<double>& mu0,
                                         const std::vector<Matrix>& trans,
                                         const std::vector<std::vector<double>>& lik) {
  const std::size_t m = mu0.size();
  const std::size_t steps = trans.size();
  std::vector<double> joint(m, 0.0);
  std::vector<std::size_t> path(steps + 1, 0);
  const std::size_t total = static_cast<std::size_t>(std::pow(m, steps + 1) + 0.5);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (std::size_t t = 0; t <= steps; ++t) {
      path[t] = c % m;
      c /= m;
    }
    double p = mu0[path[0]];
    for (std::size_t t = 0; t < steps && p > 0.0; ++t)
      p *= trans[t][path[t]][path[t + 1]] * lik[t][path[t + 1]];
    joint[path[steps]] += p;
  }
  const double z = std::accumulate(joint.begin(), joint.end(), 0.0);
  for (double& v : joint) v /= z;
  return joint;
}

inline double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

// Expected entropy reduction by listing every observation symbol.
// rows[m][o] is P(o | m).
inline double info_gain(const std::vector<double>& prior, const Matrix& rows) {
  const std::size_t symbols = rows.front().size();
  double expected = 0.0;
  for (std::size_t o = 0; o < symbols; ++o) {
    std::vector<double> post(prior.size());
    double p_o = 0.0;
    for (std::size_t m = 0; m < prior.size(); ++m) {
      post[m] = prior[m] * rows[m][o];
      p_o += post[m];
    }
    if (p_o <= 0.0) continue;
    for (double& v : post) v /= p_o;
    expected += p_o * entropy(post);
  }
  return entropy(prior) - expected;
}

inline double objective(const immpc::ScheduleProblem& p, const std::vector<int>& chosen) {
  double value = 0.0;
  double info = 0.0;
  std::vector<int> assets;
  for (int i : chosen) {
    info += p.info[static_cast<std::size_t>(i)];
    assets.push_back(p.windows[static_cast<std::size_t>(i)].asset);
  }
  std::sort(assets.begin(), assets.end());
  assets.erase(std::unique(assets.begin(), assets.end()), assets.end());
  for (int a : assets) {
    for (int s = 0; s < p.scenarios; ++s) {
      int hits = 0;
      for (int i : chosen)
        if (p.windows[static_cast<std::size_t>(i)].asset == a)
          hits += p.z[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)];
      value += p.q[static_cast<std::size_t>(a)] * std::min(1, hits);
    }
  }
  return value / p.scenarios + p.lambda * info;
}

inline bool feasible(const immpc::ScheduleProblem& p, const std::vector<int>& chosen) {
  for (const auto& clique : p.cliques) {
    int n = 0;
    for (int i : clique) n += std::count(chosen.begin(), chosen.end(), i) > 0;
    if (n > 1) return false;
  }
  return true;
}

struct SubsetResult {
  double best = 0.0;
  std::vector<int> ids;  // lexicographically smallest optimal set with no dead weight
};

// Every subset of windows; the reported set follows the solver's tie rule.
// First pass finds the optimum, second pass checks near-optimal subsets.
inline SubsetResult best_subset(const immpc::ScheduleProblem& p, double eps = 1e-12) {
  const std::size_t n = p.windows.size();
  const std::uint64_t total = std::uint64_t{1} << n;
  auto members = [&](std::uint64_t mask) {
    std::vector<int> chosen;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) chosen.push_back(static_cast<int>(i));
    return chosen;
  };
  std::vector<double> value(total, -1.0);
  double best = 0.0;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    const auto chosen = members(mask);
    if (!feasible(p, chosen)) continue;
    value[mask] = objective(p, chosen);
    best = std::max(best, value[mask]);
  }
  SubsetResult r;
  r.best = best;
  bool have = false;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    if (value[mask] < best - 1e-9) continue;
    bool irredundant = true;
    for (std::size_t i = 0; i < n && irredundant; ++i)
      if (mask >> i & 1 && value[mask] - value[mask & ~(std::uint64_t{1} << i)] <= eps)
        irredundant = false;
    if (!irredundant) continue;
    std::vector<int> ids;
    for (int i : members(mask)) ids.push_back(p.windows[static_cast<std::size_t>(i)].id);
    std::sort(ids.begin(), ids.end());
    if (!have || ids < r.ids) {
      r.ids = ids;
      have = true;
    }
  }
  return r;
}

// Best total weight over all row -> column assignments (rectangular allowed,
// rows may stay unassigned).
inline double best_assignment(const Matrix& w) {
  const std::size_t rows = w.size();
  const std::size_t cols = rows ? w[0].size() : 0;
  const std::size_t n = std::max(rows, cols);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0.0;
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
      if (perm[i] < cols) total += std::max(0.0, w[i][perm[i]]);
    best = std::max(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Elevation from the central angle between station and sub-satellite point on
// a spherical Earth: tan(el) = (cos psi - R/r) / sin psi.
inline double elevation_deg(const immpc::OrbitSpec& o, double lat_deg, double lon_deg,
                            immpc::UtcTime t) {
  constexpr double deg = std::numbers::pi / 180.0;
  const double r = immpc::kEarthRadiusKm + o.altitude_km;
  const double n = std::sqrt(immpc::kEarthMuKm3s2 / (r * r * r));
  const double u = o.arg_latitude_deg * deg + n * static_cast<double>(t.ms - o.epoch.ms) / 1000.0;
  const double inc = o.inclination_deg * deg;
  const double sat_lat = std::asin(std::sin(inc) * std::sin(u));
  const double sat_lon = o.raan_deg * deg + std::atan2(std::cos(inc) * std::sin(u), std::cos(u)) -
                         immpc::gmst_radians(t);
  const double lat = lat_deg * deg;
  const double cos_psi = std::sin(lat) * std::sin(sat_lat) +
                         std::cos(lat) * std::cos(sat_lat) * std::cos(sat_lon - lon_deg * deg);
  const double psi = std::acos(std::clamp(cos_psi, -1.0, 1.0));
  return std::atan2(std::cos(psi) - immpc::kEarthRadiusKm / r, std::sin(psi)) / deg;
}

}  // namespace oracle
