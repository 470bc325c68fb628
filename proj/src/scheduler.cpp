#include "immpc/scheduler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace immpc {
namespace {

constexpr double kEps = 1e-12;

// Problem re-indexed by ascending window id with scenario outcomes packed
// into 64-bit words.
struct Compiled {
  int n = 0;
  int words = 0;
  std::vector<int> index;               // position -> problem index
  std::vector<int> ids;                 // position -> window id
  std::vector<int> asset;               // position -> local asset
  std::vector<double> qs;               // local asset -> q / S
  std::vector<double> info;             // position -> lambda * Delta H
  std::vector<std::vector<std::uint64_t>> z;  // position -> packed scenarios
  std::vector<std::vector<int>> conflicts;    // position -> positions

  explicit Compiled(const ScheduleProblem& p) {
    n = static_cast<int>(p.windows.size());
    words = (p.scenarios + 63) / 64;
    index.resize(static_cast<std::size_t>(n));
    std::iota(index.begin(), index.end(), 0);
    std::stable_sort(index.begin(), index.end(),
                     [&](int a, int b) { return p.windows[static_cast<std::size_t>(a)].id <
                                                p.windows[static_cast<std::size_t>(b)].id; });
    std::vector<int> pos_of(static_cast<std::size_t>(n));
    std::unordered_map<int, int> local;
    for (int k = 0; k < n; ++k) {
      const auto i = static_cast<std::size_t>(index[static_cast<std::size_t>(k)]);
      pos_of[i] = k;
      const ContactWindow& w = p.windows[i];
      ids.push_back(w.id);
      auto [it, fresh] = local.emplace(w.asset, static_cast<int>(qs.size()));
      if (fresh) qs.push_back(p.q[static_cast<std::size_t>(w.asset)] / p.scenarios);
      asset.push_back(it->second);
      info.push_back(p.lambda * p.info[i]);
      std::vector<std::uint64_t> bits(static_cast<std::size_t>(words), 0);
      for (int s = 0; s < p.scenarios; ++s)
        if (p.z[i][static_cast<std::size_t>(s)])
          bits[static_cast<std::size_t>(s / 64)] |= std::uint64_t{1} << (s % 64);
      z.push_back(std::move(bits));
    }
    conflicts.resize(static_cast<std::size_t>(n));
    for (const auto& clique : p.cliques) {
      for (int a : clique)
        for (int b : clique)
          if (a != b)
            conflicts[static_cast<std::size_t>(pos_of[static_cast<std::size_t>(a)])].push_back(
                pos_of[static_cast<std::size_t>(b)]);
    }
    for (auto& c : conflicts) {
      std::sort(c.begin(), c.end());
      c.erase(std::unique(c.begin(), c.end()), c.end());
    }
  }

  int assets() const { return static_cast<int>(qs.size()); }

  double gain(int p, const std::vector<std::uint64_t>& cover) const {
    const auto& zp = z[static_cast<std::size_t>(p)];
    int fresh = 0;
    const std::size_t base = static_cast<std::size_t>(asset[static_cast<std::size_t>(p)] * words);
    for (int w = 0; w < words; ++w)
      fresh += std::popcount(zp[static_cast<std::size_t>(w)] & ~cover[base + static_cast<std::size_t>(w)]);
    return qs[static_cast<std::size_t>(asset[static_cast<std::size_t>(p)])] * fresh +
           info[static_cast<std::size_t>(p)];
  }

  void add(int p, std::vector<std::uint64_t>& cover) const {
    const std::size_t base = static_cast<std::size_t>(asset[static_cast<std::size_t>(p)] * words);
    for (int w = 0; w < words; ++w)
      cover[base + static_cast<std::size_t>(w)] |= z[static_cast<std::size_t>(p)][static_cast<std::size_t>(w)];
  }

  // Marginal loss of removing each chosen position; redundant ones lose nothing.
  bool irredundant(const std::vector<int>& chosen) const {
    for (int p : chosen) {
      double loss = info[static_cast<std::size_t>(p)];
      int unique = 0;
      for (int w = 0; w < words; ++w) {
        std::uint64_t others = 0;
        for (int o : chosen)
          if (o != p && asset[static_cast<std::size_t>(o)] == asset[static_cast<std::size_t>(p)])
            others |= z[static_cast<std::size_t>(o)][static_cast<std::size_t>(w)];
        unique += std::popcount(z[static_cast<std::size_t>(p)][static_cast<std::size_t>(w)] & ~others);
      }
      loss += qs[static_cast<std::size_t>(asset[static_cast<std::size_t>(p)])] * unique;
      if (loss <= kEps) return false;
    }
    return true;
  }

  std::vector<int> to_indices(const std::vector<int>& positions) const {
    std::vector<int> out;
    for (int p : positions) out.push_back(index[static_cast<std::size_t>(p)]);
    return out;
  }
};

std::vector<int> greedy_positions(const Compiled& c) {
  std::vector<std::uint64_t> cover(static_cast<std::size_t>(c.assets() * c.words), 0);
  std::vector<char> blocked(static_cast<std::size_t>(c.n), 0);
  std::vector<int> chosen;
  for (;;) {
    int best = -1;
    double best_gain = kEps;
    for (int p = 0; p < c.n; ++p) {
      if (blocked[static_cast<std::size_t>(p)]) continue;
      const double g = c.gain(p, cover);
      if (g > best_gain) {
        best_gain = g;
        best = p;
      }
    }
    if (best < 0) break;
    chosen.push_back(best);
    blocked[static_cast<std::size_t>(best)] = 1;
    for (int o : c.conflicts[static_cast<std::size_t>(best)]) blocked[static_cast<std::size_t>(o)] = 1;
    c.add(best, cover);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

// Drops zero-contribution windows (highest id first) until none remain.
void make_irredundant(const Compiled& c, std::vector<int>& chosen) {
  for (bool changed = true; changed;) {
    changed = false;
    for (auto it = chosen.rbegin(); it != chosen.rend(); ++it) {
      std::vector<int> without;
      for (int p : chosen)
        if (p != *it) without.push_back(p);
      std::vector<int> single{*it};
      // Loss of *it given the others.
      double loss = c.info[static_cast<std::size_t>(*it)];
      int unique = 0;
      for (int w = 0; w < c.words; ++w) {
        std::uint64_t others = 0;
        for (int o : without)
          if (c.asset[static_cast<std::size_t>(o)] == c.asset[static_cast<std::size_t>(*it)])
            others |= c.z[static_cast<std::size_t>(o)][static_cast<std::size_t>(w)];
        unique += std::popcount(c.z[static_cast<std::size_t>(*it)][static_cast<std::size_t>(w)] & ~others);
      }
      loss += c.qs[static_cast<std::size_t>(c.asset[static_cast<std::size_t>(*it)])] * unique;
      if (loss <= kEps) {
        chosen = std::move(without);
        changed = true;
        break;
      }
    }
  }
}

double objective_of(const Compiled& c, const std::vector<int>& chosen) {
  std::vector<std::uint64_t> cover(static_cast<std::size_t>(c.assets() * c.words), 0);
  double v = 0.0;
  for (int p : chosen) {
    v += c.gain(p, cover);
    c.add(p, cover);
  }
  return v;
}

class BranchAndBound {
 public:
  BranchAndBound(const Compiled& c, std::uint64_t node_limit) : c_(c), limit_(node_limit) {
    for (int p = 0; p < c.n; ++p) {
      std::uint64_t m = 0;
      for (int o : c.conflicts[static_cast<std::size_t>(p)]) m |= std::uint64_t{1} << o;
      conflict_.push_back(m);
    }
    cover_.assign(static_cast<std::size_t>(c.assets() * c.words), 0);
    scratch_.assign(cover_.size(), 0);
  }

  void seed(std::vector<int> positions) {
    best_ = std::move(positions);
    best_obj_ = objective_of(c_, best_);
  }

  void run() {
    const std::uint64_t all = c_.n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << c_.n) - 1;
    dfs(all, 0.0);
  }

  const std::vector<int>& best() const { return best_; }
  bool aborted() const { return aborted_; }
  std::uint64_t nodes() const { return nodes_; }

 private:
  double bound(std::uint64_t avail, double value) {
    std::fill(scratch_.begin(), scratch_.end(), 0);
    double extra = 0.0;
    for (std::uint64_t m = avail; m; m &= m - 1) {
      const int p = std::countr_zero(m);
      extra += std::max(0.0, c_.info[static_cast<std::size_t>(p)]);
      const std::size_t base = static_cast<std::size_t>(c_.asset[static_cast<std::size_t>(p)] * c_.words);
      for (int w = 0; w < c_.words; ++w)
        scratch_[base + static_cast<std::size_t>(w)] |= c_.z[static_cast<std::size_t>(p)][static_cast<std::size_t>(w)];
    }
    for (int a = 0; a < c_.assets(); ++a) {
      int fresh = 0;
      for (int w = 0; w < c_.words; ++w) {
        const std::size_t k = static_cast<std::size_t>(a * c_.words + w);
        fresh += std::popcount(scratch_[k] & ~cover_[k]);
      }
      extra += c_.qs[static_cast<std::size_t>(a)] * fresh;
    }
    return value + extra;
  }

  // Could some completion of the current prefix be lexicographically smaller
  // than the incumbent?
  bool can_beat_lex() const {
    const std::size_t n = std::min(chosen_.size(), best_.size());
    for (std::size_t j = 0; j < n; ++j) {
      if (chosen_[j] != best_[j]) return chosen_[j] < best_[j];
    }
    return chosen_.size() < best_.size();
  }

  static bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  }

  void consider(double value) {
    if (value < best_obj_ - kEps) return;
    if (value <= best_obj_ + kEps && !lex_less(chosen_, best_)) return;
    if (!c_.irredundant(chosen_)) return;
    best_ = chosen_;
    best_obj_ = value;
  }

  void dfs(std::uint64_t avail, double value) {
    if (aborted_) return;
    if (++nodes_ > limit_) {
      aborted_ = true;
      return;
    }
    if (avail == 0) {
      consider(value);
      return;
    }
    const double ub = bound(avail, value);
    if (ub < best_obj_ - kEps) return;
    if (ub <= best_obj_ + kEps && !can_beat_lex()) return;

    const int p = std::countr_zero(avail);
    const std::uint64_t bit = std::uint64_t{1} << p;
    const double g = c_.gain(p, cover_);
    if (g > kEps) {
      const std::size_t base = static_cast<std::size_t>(c_.asset[static_cast<std::size_t>(p)] * c_.words);
      std::vector<std::uint64_t> saved(cover_.begin() + static_cast<std::ptrdiff_t>(base),
                                       cover_.begin() + static_cast<std::ptrdiff_t>(base) + c_.words);
      c_.add(p, cover_);
      chosen_.push_back(p);
      dfs(avail & ~bit & ~conflict_[static_cast<std::size_t>(p)], value + g);
      chosen_.pop_back();
      std::copy(saved.begin(), saved.end(), cover_.begin() + static_cast<std::ptrdiff_t>(base));
    }
    dfs(avail & ~bit, value);
  }

  const Compiled& c_;
  std::uint64_t limit_;
  std::vector<std::uint64_t> conflict_;
  std::vector<std::uint64_t> cover_;
  std::vector<std::uint64_t> scratch_;
  std::vector<int> chosen_;
  std::vector<int> best_;
  double best_obj_ = 0.0;
  std::uint64_t nodes_ = 0;
  bool aborted_ = false;
};

bool overlaps(const ContactWindow& a, const ContactWindow& b) {
  return a.start < b.end && b.start < a.end;
}

}  // namespace

void ScheduleProblem::validate() const {
  const std::size_t n = windows.size();
  if (z.size() != n || info.size() != n)
    throw std::invalid_argument("schedule problem arrays are not aligned with its windows");
  if (scenarios < 1) throw std::invalid_argument("schedule problem needs S >= 1");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  for (std::size_t i = 0; i < n; ++i) {
    if (z[i].size() != static_cast<std::size_t>(scenarios))
      throw std::invalid_argument("z row has the wrong scenario count");
    const int a = windows[i].asset;
    if (a < 0 || static_cast<std::size_t>(a) >= q.size() || !(q[static_cast<std::size_t>(a)] > 0.0))
      throw std::invalid_argument("asset " + std::to_string(a) + " needs a positive priority");
  }
  for (const auto& c : cliques)
    for (int i : c)
      if (i < 0 || static_cast<std::size_t>(i) >= n)
        throw std::invalid_argument("clique refers to an unknown window index");
}

SolverKind solver_from_string(std::string_view s) {
  if (s == "exact") return SolverKind::exact;
  if (s == "greedy") return SolverKind::greedy;
  throw std::invalid_argument("unknown solver '" + std::string(s) + "'");
}

const char* to_string(SolverKind k) { return k == SolverKind::exact ? "exact" : "greedy"; }

std::vector<std::vector<int>> exclusion_cliques(std::span<const ContactWindow> windows) {
  std::vector<std::vector<int>> out;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    for (std::size_t j = i + 1; j < windows.size(); ++j) {
      const ContactWindow& a = windows[i];
      const ContactWindow& b = windows[j];
      if (!overlaps(a, b)) continue;
      if (a.station == b.station || a.asset == b.asset)
        out.push_back({static_cast<int>(i), static_cast<int>(j)});
    }
  }
  return out;
}

ScheduleProblem build_problem(std::span<const Belief> beliefs,
                              std::span<const ContactWindow> windows, const ScenarioSet& scenarios,
                              const InfoContext& ctx, std::span<const double> q, double lambda,
                              UtcTime now) {
  ScheduleProblem p;
  p.windows.assign(windows.begin(), windows.end());
  p.q.assign(q.begin(), q.end());
  p.lambda = lambda;
  p.scenarios = scenarios.scenarios;
  std::unordered_map<int, const Belief*> by_asset;
  for (const Belief& b : beliefs) by_asset[b.asset] = &b;
  for (const ContactWindow& w : windows) {
    auto zit = scenarios.z.find(w.id);
    if (zit == scenarios.z.end())
      throw std::invalid_argument("window " + std::to_string(w.id) + " has no scenario outcomes");
    auto bit = by_asset.find(w.asset);
    if (bit == by_asset.end())
      throw std::invalid_argument("window " + std::to_string(w.id) + " refers to an asset without a belief");
    p.z.push_back(zit->second);
    const double lead = std::max(0.0, hours_between(now, w.start));
    p.info.push_back(info_gain(*bit->second, w.action, link_probability(ctx.link, w.e_max_deg),
                               ctx.likelihood, ctx.model, lead));
  }
  p.cliques = exclusion_cliques(windows);
  p.validate();
  return p;
}

bool is_feasible(const ScheduleProblem& problem, std::span<const int> indices) {
  for (const auto& c : problem.cliques) {
    int hits = 0;
    for (int i : c)
      if (std::find(indices.begin(), indices.end(), i) != indices.end()) ++hits;
    if (hits > 1) return false;
  }
  return true;
}

Schedule evaluate(const ScheduleProblem& problem, std::span<const int> indices) {
  Schedule s;
  std::unordered_map<int, std::vector<std::size_t>> by_asset;
  for (int i : indices) {
    const auto k = static_cast<std::size_t>(i);
    s.selected.push_back(problem.windows.at(k).id);
    s.info_term += problem.info[k];
    by_asset[problem.windows[k].asset].push_back(k);
  }
  std::sort(s.selected.begin(), s.selected.end());
  for (const auto& [asset, ws] : by_asset) {
    int covered = 0;
    for (int sc = 0; sc < problem.scenarios; ++sc) {
      for (std::size_t k : ws) {
        if (problem.z[k][static_cast<std::size_t>(sc)]) {
          ++covered;
          break;
        }
      }
    }
    s.value_term += problem.q[static_cast<std::size_t>(asset)] * covered / problem.scenarios;
  }
  s.objective = s.value_term + problem.lambda * s.info_term;
  return s;
}

Schedule solve_greedy(const ScheduleProblem& problem) {
  problem.validate();
  const Compiled c(problem);
  Schedule s = evaluate(problem, c.to_indices(greedy_positions(c)));
  s.proven_optimal = false;
  return s;
}

Schedule solve_exact(const ScheduleProblem& problem, const SolveOptions& options) {
  problem.validate();
  const std::size_t limit = std::min<std::size_t>(options.exact_limit, 64);
  if (problem.windows.size() > limit)
    throw std::invalid_argument("exact solver limited to " + std::to_string(limit) + " windows, got " +
                                std::to_string(problem.windows.size()));
  const Compiled c(problem);
  std::vector<int> warm = greedy_positions(c);
  make_irredundant(c, warm);
  BranchAndBound bb(c, options.node_limit);
  bb.seed(std::move(warm));
  bb.run();
  Schedule s = evaluate(problem, c.to_indices(bb.best()));
  s.proven_optimal = !bb.aborted();
  s.nodes = bb.nodes();
  return s;
}

Schedule solve(const ScheduleProblem& problem, SolverKind kind, const SolveOptions& options) {
  if (kind == SolverKind::exact && problem.windows.size() <= std::min<std::size_t>(options.exact_limit, 64))
    return solve_exact(problem, options);
  return solve_greedy(problem);
}

std::optional<int> next_action(const Schedule& schedule, std::span<const ContactWindow> windows) {
  const ContactWindow* best = nullptr;
  for (int id : schedule.selected) {
    for (const ContactWindow& w : windows) {
      if (w.id != id) continue;
      if (!best || w.start < best->start || (w.start == best->start && w.id < best->id)) best = &w;
      break;
    }
  }
  if (!best) return std::nullopt;
  return best->id;
}

std::vector<ContactWindow> synthesize_recover_windows(std::span<const Belief> beliefs,
                                                      std::span<const ContactWindow> windows,
                                                      const ModeSet& modes, ActionId contact,
                                                      ActionId recover, double threshold,
                                                      int first_id) {
  std::unordered_map<int, double> lethal_mass;
  for (const Belief& b : beliefs) {
    double m = 0.0;
    for (const FaultMode& f : modes.modes())
      if (f.lethal) m += b.mu(f.id);
    lethal_mass[b.asset] = m;
  }
  std::vector<ContactWindow> out;
  for (const ContactWindow& w : windows) {
    if (w.action != contact) continue;
    auto it = lethal_mass.find(w.asset);
    if (it == lethal_mass.end() || it->second <= threshold) continue;
    ContactWindow r = w;
    r.action = recover;
    r.id = first_id + w.id;
    out.push_back(std::move(r));
  }
  return out;
}

nlohmann::json to_json(const ScheduleProblem& problem, const ActionSet& actions) {
  nlohmann::json ws = nlohmann::json::array();
  for (const ContactWindow& w : problem.windows) {
    ws.push_back({{"id", w.id},
                  {"asset", w.asset},
                  {"station", w.station},
                  {"t_start", format_iso8601(w.start)},
                  {"t_end", format_iso8601(w.end)},
                  {"e_max_deg", w.e_max_deg},
                  {"action", actions[w.action].name}});
  }
  return {{"windows", ws},           {"z", problem.z},         {"info", problem.info},
          {"q", problem.q},          {"lambda", problem.lambda}, {"cliques", problem.cliques},
          {"scenarios", problem.scenarios}};
}

nlohmann::json to_json(const Schedule& s) {
  return {{"selected", s.selected},       {"objective", s.objective},
          {"value_term", s.value_term},   {"info_term", s.info_term},
          {"proven_optimal", s.proven_optimal}, {"nodes", s.nodes}};
}

}  // namespace immpc
