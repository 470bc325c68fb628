#include <doctest.h>

#include <vector>

#include "immpc/config.hpp"
#include "immpc/fault_model.hpp"

using namespace immpc;

namespace {

FaultMode lethal_mode(double lo, double hi, double alpha) {
  FaultMode m;
  m.id = 1;
  m.name = "X";
  m.lethal = true;
  m.ttd = BoundedDistribution::uniform(lo, hi, TimeUnit::hours);
  m.alpha = alpha;
  return m;
}

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> g;
  for (double t = lo; t <= hi + 1e-12; t += step) g.push_back(t);
  return g;
}

}  // namespace

TEST_CASE("death hazard follows the uniform ttd") {
  const FaultMode gnc = lethal_mode(6, 24, 0.5);
  CHECK(death_hazard(gnc, 0.0, 1.0) == 0.0);
  CHECK(death_hazard(gnc, 12.0, 1.0) == doctest::Approx(1.0 / 24.0).epsilon(1e-14));
  CHECK(death_hazard(gnc, 30.0, 1.0) == 0.5);
  CHECK(death_hazard(gnc, 24.0, 1.0) == 0.5);
}

TEST_CASE("death hazard rejects non-lethal modes") {
  FaultMode ok;
  ok.name = "OK";
  CHECK_THROWS_AS(death_hazard(ok, 1.0, 1.0), ContractViolation);
  CHECK_THROWS_AS(death_hazard(lethal_mode(6, 24, 0.5), -1.0, 1.0), ContractViolation);
}

TEST_CASE("death hazard is nondecreasing for uniform ttd") {
  Rng rng(11);
  for (int k = 0; k < 200; ++k) {
    const double lo = uniform(rng, 0.0, 10.0);
    const double hi = lo + uniform(rng, 0.5, 20.0);
    const double alpha = uniform(rng, 0.01, 0.99);
    const double dt = uniform(rng, 0.05, 2.0);
    const FaultMode m = lethal_mode(lo, hi, alpha);
    double prev = 0.0;
    for (double tau = 0.0; tau < 2.0 * hi; tau += 0.1) {
      const double h = death_hazard(m, tau, dt);
      CHECK(h >= prev - 1e-15);
      CHECK(h <= alpha);
      prev = h;
    }
  }
}

TEST_CASE("lethal row puts the hazard on dead and the rest on self") {
  const ModelBundle mb = default_leop_model();
  const TransitionModel model(mb.modes, persistent_base(mb.modes), 1.0);
  const Eigen::MatrixXd pi = transition_matrix(model, 12.0);
  const ModeId gnc = mb.modes.index_of("GNC");
  const ModeId dead = mb.modes.dead();
  CHECK(pi(gnc, dead) == doctest::Approx(1.0 / 24.0).epsilon(1e-14));
  CHECK(pi(gnc, gnc) == doctest::Approx(23.0 / 24.0).epsilon(1e-14));
  for (Eigen::Index j = 0; j < pi.cols(); ++j) CHECK(pi(dead, j) == (j == dead ? 1.0 : 0.0));
}

TEST_CASE("tau zero gives the base matrix with gating") {
  const ModelBundle mb = default_leop_model();
  const Eigen::MatrixXd pi = transition_matrix(mb.model, 0.0);
  CHECK((pi - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rows stay stochastic on a dense grid") {
  const ModelBundle mb = default_leop_model();
  for (double tau : grid(0.0, 48.0, 0.05)) {
    const Eigen::MatrixXd pi = transition_matrix(mb.model, tau);
    for (Eigen::Index r = 0; r < pi.rows(); ++r) CHECK(std::abs(pi.row(r).sum() - 1.0) <= 1e-12);
    CHECK(pi.minCoeff() >= 0.0);
  }
}

TEST_CASE("non-lethal persistent rows are identity rows") {
  const ModelBundle mb = default_leop_model();
  const ModeId comms = mb.modes.index_of("COMMS");
  for (double tau : {0.0, 3.0, 40.0}) {
    const Eigen::MatrixXd pi = transition_matrix(mb.model, tau);
    for (Eigen::Index j = 0; j < pi.cols(); ++j) CHECK(pi(comms, j) == (j == comms ? 1.0 : 0.0));
  }
}

TEST_CASE("gating folds early recovery mass into self") {
  const ModelBundle mb = default_leop_model();
  Eigen::MatrixXd base = persistent_base(mb.modes);
  const ModeId comms = mb.modes.index_of("COMMS");
  base(comms, comms) = 0.7;
  base(comms, mb.modes.ok()) = 0.3;
  const TransitionModel model(mb.modes, base, 0.25);
  const Eigen::MatrixXd early = transition_matrix(model, 0.0);
  CHECK(early(comms, mb.modes.ok()) == 0.0);
  CHECK(early(comms, comms) == doctest::Approx(1.0));
  const Eigen::MatrixXd late = transition_matrix(model, 1.0);
  CHECK(late(comms, mb.modes.ok()) == doctest::Approx(0.3));
}

TEST_CASE("Table 1 model validates on 0..30 h") {
  const ModelBundle mb = default_leop_model();
  const auto g = grid(0.0, 30.0, 1.0);
  CHECK(validate(mb.model, g).empty());
  CHECK(validate(mb.model, grid(0.0, 30.0, 0.25)).empty());
}

TEST_CASE("validate reports a decreasing death column") {
  const ModelBundle mb = default_leop_model();
  const ModeId gnc = mb.modes.index_of("GNC");
  const MatrixFn bad = [&](double tau) {
    Eigen::MatrixXd pi = transition_matrix(mb.model, tau);
    if (tau >= 10.0) {
      pi(gnc, mb.modes.dead()) = 0.0;
      pi(gnc, gnc) = 1.0;
    }
    return pi;
  };
  const std::vector<double> g{8.0, 9.0, 10.0, 11.0};
  const auto v = validate(mb.modes, bad, g);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == Violation::Kind::monotonicity);
  CHECK(v[0].mode == gnc);
  CHECK(v[0].tau == 9.0);
  CHECK(v[0].tau_next == 10.0);
}

TEST_CASE("validate reports early recovery mass") {
  const ModelBundle mb = default_leop_model();
  const ModeId comms = mb.modes.index_of("COMMS");
  const MatrixFn leaky = [&](double tau) {
    Eigen::MatrixXd pi = transition_matrix(mb.model, tau);
    pi(comms, comms) = 0.9;
    pi(comms, mb.modes.ok()) = 0.1;
    return pi;
  };
  const std::vector<double> g{0.0};
  const auto v = validate(mb.modes, leaky, g);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == Violation::Kind::gating);
  CHECK(v[0].mode == comms);
}

TEST_CASE("validate reports a non-absorbing dead row and bad row sums") {
  const ModelBundle mb = default_leop_model();
  const MatrixFn broken = [&](double tau) {
    Eigen::MatrixXd pi = transition_matrix(mb.model, tau);
    pi(mb.modes.dead(), mb.modes.dead()) = 0.5;
    pi(mb.modes.dead(), mb.modes.ok()) = 0.5;
    pi(mb.modes.ok(), mb.modes.ok()) = 0.9;
    return pi;
  };
  const std::vector<double> g{0.0};
  const auto v = validate(mb.modes, broken, g);
  bool absorbing = false, row_sum = false;
  for (const auto& x : v) {
    absorbing |= x.kind == Violation::Kind::absorbing;
    row_sum |= x.kind == Violation::Kind::row_sum;
  }
  CHECK(absorbing);
  CHECK(row_sum);
}

TEST_CASE("mode set invariants") {
  FaultMode ok{0, "OK", false, {}, {}, {}, {}};
  FaultMode dead{1, "DEAD", false, {}, {}, {}, {}};
  CHECK_NOTHROW(ModeSet({ok, dead}, 0, 1));
  FaultMode half{1, "HALF", true, BoundedDistribution::uniform(1, 2, TimeUnit::hours), {}, {}, {}};
  FaultMode dead2{2, "DEAD", false, {}, {}, {}, {}};
  CHECK_THROWS_AS(ModeSet({ok, half, dead2}, 0, 2), ModelError);
  FaultMode bad_alpha = half;
  bad_alpha.alpha = 1.0;
  CHECK_THROWS_AS(ModeSet({ok, bad_alpha, dead2}, 0, 2), ModelError);
  FaultMode gap{5, "GAP", false, {}, {}, {}, {}};
  CHECK_THROWS_AS(ModeSet({ok, gap}, 0, 1), ModelError);
  CHECK_THROWS_AS(ModeSet({ok, dead}, 0, 0), ModelError);
}

TEST_CASE("bounded distributions") {
  const auto u = BoundedDistribution::uniform(15, 120, TimeUnit::minutes);
  CHECK(u.cdf(10) == 0.0);
  CHECK(u.cdf(130) == 1.0);
  CHECK(u.lower_hours() == doctest::Approx(0.25));
  CHECK(u.cdf_hours(1.0) == doctest::Approx(45.0 / 105.0));
  CHECK_THROWS_AS(BoundedDistribution::uniform(3, 3, TimeUnit::hours), ModelError);
  CHECK_THROWS_AS(BoundedDistribution::uniform(-1, 3, TimeUnit::hours), ModelError);
  const auto p = BoundedDistribution::point(2, TimeUnit::hours);
  CHECK(p.cdf(1.9) == 0.0);
  CHECK(p.cdf(2.0) == 1.0);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const double x = u.sample(rng);
    CHECK(x >= 15.0);
    CHECK(x < 120.0);
  }
}
