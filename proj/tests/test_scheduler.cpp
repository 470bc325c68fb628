#include <doctest.h>

#include <chrono>

#include "immpc/config.hpp"
#include "immpc/scheduler.hpp"
#include "oracles.hpp"
#include "random_problem.hpp"

using namespace immpc;
using testing_support::random_problem;

namespace {

std::vector<int> indices_of(const ScheduleProblem& p, const std::vector<int>& ids) {
  std::vector<int> idx;
  for (int id : ids)
    for (std::size_t i = 0; i < p.windows.size(); ++i)
      if (p.windows[i].id == id) idx.push_back(static_cast<int>(i));
  return idx;
}

ContactWindow win(int id, int asset, const char* station, int start_min, int end_min, ActionId a = 0) {
  ContactWindow w;
  w.id = id;
  w.asset = asset;
  w.station = station;
  w.start = UtcTime{start_min * 60'000LL};
  w.end = UtcTime{end_min * 60'000LL};
  w.action = a;
  w.e_max_deg = 45.0;
  return w;
}

}  // namespace

TEST_CASE("exact solver matches subset enumeration") {
  Rng rng(2025);
  for (int k = 0; k < 150; ++k) {
    const ScheduleProblem p = random_problem(rng, 12, 8, k % 2 == 1);
    const Schedule s = solve_exact(p);
    const auto ref = oracle::best_subset(p);
    CHECK(s.proven_optimal);
    CHECK(std::abs(s.objective - ref.best) <= 1e-9);
    CHECK(s.selected == ref.ids);
    const auto idx = indices_of(p, s.selected);
    CHECK(is_feasible(p, idx));
    CHECK(oracle::feasible(p, idx));
    CHECK(std::abs(oracle::objective(p, idx) - s.objective) <= 1e-12);
    CHECK(std::is_sorted(s.selected.begin(), s.selected.end()));
  }
}

TEST_CASE("greedy is feasible and never beats exact") {
  Rng rng(77);
  for (int k = 0; k < 100; ++k) {
    const ScheduleProblem p = random_problem(rng, 12, 6);
    const Schedule g = solve_greedy(p);
    const Schedule e = solve_exact(p);
    const auto idx = indices_of(p, g.selected);
    CHECK(is_feasible(p, idx));
    CHECK(g.objective <= e.objective + 1e-12);
    CHECK(std::abs(oracle::objective(p, idx) - g.objective) <= 1e-12);
    CHECK_FALSE(g.proven_optimal);
  }
}

TEST_CASE("solve falls back to greedy above the exact limit") {
  Rng rng(3);
  const ScheduleProblem p = random_problem(rng, 12, 4);
  SolveOptions o;
  o.exact_limit = 0;
  CHECK_THROWS_AS(solve_exact(p, o), std::invalid_argument);
  const Schedule s = solve(p, SolverKind::exact, o);
  CHECK(s.selected == solve_greedy(p).selected);
  CHECK(solve(p, SolverKind::greedy).selected == solve_greedy(p).selected);
}

TEST_CASE("node limit returns the incumbent") {
  Rng rng(8);
  const ScheduleProblem p = random_problem(rng, 14, 8);
  SolveOptions o;
  o.node_limit = 1;
  const Schedule s = solve_exact(p, o);
  CHECK(is_feasible(p, indices_of(p, s.selected)));
  CHECK(s.objective >= solve_greedy(p).objective - 1e-12);
}

TEST_CASE("worked instance") {
  // Two assets, one station. Window 5 conflicts with 7.
  ScheduleProblem p;
  p.windows = {win(5, 0, "A", 0, 10), win(7, 1, "A", 5, 15), win(9, 1, "B", 20, 30)};
  p.z = {{1, 1}, {1, 0}, {0, 1}};
  p.info = {0.0, 0.0, 0.0};
  p.q = {1.0, 1.0};
  p.scenarios = 2;
  p.cliques = exclusion_cliques(p.windows);
  REQUIRE(p.cliques.size() == 1);
  const Schedule s = solve_exact(p);
  // {5, 9}: asset 0 covered in both scenarios, asset 1 in one.
  CHECK(s.selected == std::vector<int>{5, 9});
  CHECK(s.objective == doctest::Approx(1.5));
  CHECK(s.value_term == doctest::Approx(1.5));
  CHECK(s.info_term == 0.0);
}

TEST_CASE("zero-value windows are not selected") {
  ScheduleProblem p;
  p.windows = {win(1, 0, "A", 0, 10), win(2, 0, "B", 20, 30)};
  p.z = {{1}, {1}};
  p.info = {0.0, 0.0};
  p.q = {1.0};
  p.scenarios = 1;
  const Schedule s = solve_exact(p);
  CHECK(s.selected == std::vector<int>{1});
}

TEST_CASE("exclusion cliques") {
  const std::vector<ContactWindow> w{win(0, 0, "A", 0, 10), win(1, 1, "A", 9, 20),
                                     win(2, 0, "B", 5, 8), win(3, 2, "B", 10, 12),
                                     win(4, 1, "C", 20, 25)};
  auto c = exclusion_cliques(w);
  for (auto& x : c) std::sort(x.begin(), x.end());
  std::sort(c.begin(), c.end());
  CHECK(c == std::vector<std::vector<int>>{{0, 1}, {0, 2}});
}

TEST_CASE("next action") {
  const std::vector<ContactWindow> w{win(4, 0, "A", 30, 40), win(2, 1, "A", 10, 20),
                                     win(3, 2, "B", 10, 20)};
  Schedule s;
  CHECK_FALSE(next_action(s, w).has_value());
  s.selected = {3, 4};
  CHECK(next_action(s, w) == 3);
  s.selected = {2, 3, 4};
  CHECK(next_action(s, w) == 2);
}

TEST_CASE("build_problem") {
  const ModelBundle mb = default_leop_model();
  Belief b0;
  b0.asset = 0;
  b0.mu = Eigen::VectorXd(5);
  b0.mu << 0.5, 0.1, 0.2, 0.1, 0.1;
  const std::vector<Belief> beliefs{b0};
  const std::vector<ContactWindow> w{win(0, 0, "A", 0, 10, mb.contact()),
                                     win(1, 0, "A", 0, 10, mb.beacon())};
  ScenarioSet set = sample_trajectories(beliefs, mb.model, 4, 8, 1);
  set = sample_outcomes(std::move(set), w, {mb.modes, mb.link, mb.likelihood, mb.success}, 1);
  const std::vector<double> q{1.0};
  const ScheduleProblem p =
      build_problem(beliefs, w, set, {mb.link, mb.likelihood, mb.model}, q, 0.1, UtcTime{});
  CHECK(p.scenarios == 8);
  CHECK(p.info[0] == doctest::Approx(info_gain(b0, mb.contact(), link_probability(mb.link, 45.0),
                                               mb.likelihood, mb.model)));
  CHECK(p.z[1] == std::vector<std::uint8_t>(8, 0));
  CHECK(p.cliques.size() == 1);

  const std::vector<ContactWindow> stray{win(9, 3, "A", 0, 10)};
  CHECK_THROWS_AS(build_problem(beliefs, stray, set, {mb.link, mb.likelihood, mb.model}, q, 0.1, {}),
                  std::invalid_argument);
}

TEST_CASE("problem validation") {
  ScheduleProblem p;
  p.windows = {win(0, 0, "A", 0, 10)};
  p.z = {{1}};
  p.info = {0.0};
  p.q = {0.0};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.q = {1.0};
  CHECK_NOTHROW(p.validate());
  p.cliques = {{0, 3}};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("recover windows are synthesized for lethal-heavy beliefs") {
  const ModelBundle mb = default_leop_model();
  Belief sick;
  sick.asset = 0;
  sick.mu = Eigen::VectorXd(5);
  sick.mu << 0.5, 0.15, 0.1, 0.15, 0.1;
  Belief well = sick;
  well.asset = 1;
  well.mu << 0.9, 0.05, 0.05, 0.0, 0.0;
  const std::vector<Belief> beliefs{sick, well};
  const std::vector<ContactWindow> w{win(0, 0, "A", 0, 10, mb.contact()),
                                     win(1, 0, "A", 0, 10, mb.beacon()),
                                     win(2, 1, "B", 0, 10, mb.contact())};
  const auto r = synthesize_recover_windows(beliefs, w, mb.modes, mb.contact(), mb.recover(), 0.2, 100);
  REQUIRE(r.size() == 1);
  CHECK(r[0].id == 100);
  CHECK(r[0].asset == 0);
  CHECK(r[0].action == mb.recover());
}
