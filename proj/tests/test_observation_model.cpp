#include <doctest.h>

#include "immpc/config.hpp"
#include "immpc/observation_model.hpp"

using namespace immpc;

TEST_CASE("link probability at zenith") {
  const LinkModel link;
  CHECK(link_probability(link, 90.0) == doctest::Approx(0.68997).epsilon(1e-5));
  CHECK(link_probability(link, 90.0) == doctest::Approx(1.0 / (1.0 + std::exp(-0.8))).epsilon(1e-14));
}

TEST_CASE("link probability increases with elevation and floors below the mask") {
  const LinkModel link;
  double prev = 0.0;
  for (double e = 5.0; e <= 90.0; e += 0.5) {
    const double p = link_probability(link, e);
    CHECK(p > prev);
    CHECK(p < 1.0);
    prev = p;
  }
  CHECK(link_probability(link, 1.0) == link_probability(link, 5.0));
  CHECK(link_probability(link, -10.0) == link_probability(link, 5.0));
}

TEST_CASE("link model validation") {
  LinkModel link;
  CHECK_NOTHROW(link.validate());
  link.gamma = 1.5;
  CHECK_THROWS_AS(link.validate(), ModelError);
  link = {};
  link.e_floor_deg = 0.0;
  CHECK_THROWS_AS(link.validate(), ModelError);
}

TEST_CASE("LEOP likelihood rows") {
  const ModelBundle mb = default_leop_model();
  const auto& t = mb.likelihood;
  const ActionId contact = mb.contact(), beacon = mb.beacon(), recover = mb.recover();
  const ModeId ok = mb.modes.index_of("OK"), gnc = mb.modes.index_of("GNC");
  const ModeId comms = mb.modes.index_of("COMMS"), dep = mb.modes.index_of("DEP");
  const ModeId dead = mb.modes.dead();
  const double p = 0.6;
  auto at = [&](ModeId m, ActionId a, Observation o) { return t.row(m, a, p)[static_cast<std::size_t>(o)]; };

  CHECK(at(ok, contact, Observation::contact) == doctest::Approx(0.6));
  CHECK(at(gnc, contact, Observation::contact) == doctest::Approx(0.24));
  CHECK(at(comms, contact, Observation::contact) == 0.0);
  CHECK(at(dep, contact, Observation::no_contact) == 1.0);
  CHECK(at(dead, contact, Observation::no_contact) == 1.0);

  CHECK(at(ok, beacon, Observation::beacon) == doctest::Approx(0.8));
  CHECK(at(comms, beacon, Observation::beacon) == doctest::Approx(0.8));
  CHECK(at(dep, beacon, Observation::beacon) == doctest::Approx(0.05));
  CHECK(at(dead, beacon, Observation::no_beacon) == 1.0);

  for (ModeId m = 0; m < static_cast<ModeId>(mb.modes.size()); ++m) {
    CHECK(at(m, recover, Observation::no_contact) == 1.0);
    for (ActionId a = 0; a < 3; ++a) {
      const auto row = t.row(m, a, p);
      double s = 0.0;
      for (double v : row) s += v;
      CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
    }
  }
}

TEST_CASE("COMMS and DEP alias under contact but not under beacon") {
  const ModelBundle mb = default_leop_model();
  const ModeId comms = mb.modes.index_of("COMMS"), dep = mb.modes.index_of("DEP");
  for (double p : {0.1, 0.5, 0.69}) {
    CHECK(is_aliased(mb.likelihood, comms, dep, mb.contact(), p));
    CHECK_FALSE(is_aliased(mb.likelihood, comms, dep, mb.beacon(), p));
    const auto d = disambiguating_actions(mb.likelihood, comms, dep, p);
    REQUIRE(d.size() == 1);
    CHECK(d[0] == mb.beacon());
  }
  const ModeId ok = mb.modes.ok(), gnc = mb.modes.index_of("GNC");
  CHECK_FALSE(is_aliased(mb.likelihood, ok, gnc, mb.contact(), 0.5));
  CHECK(is_aliased(mb.likelihood, ok, gnc, mb.beacon(), 0.5));
}

TEST_CASE("observation names round-trip") {
  for (Observation o : {Observation::contact, Observation::no_contact, Observation::beacon,
                        Observation::no_beacon})
    CHECK(observation_from_string(to_string(o)) == o);
  CHECK_THROWS(observation_from_string("ping"));
}

TEST_CASE("table rejects out-of-range entries") {
  LikelihoodTable t(2, 1);
  CHECK_THROWS(t.set(2, 0, {}));
  CHECK_THROWS(t.at(0, 0));
  CHECK(t.find(0, 0) == nullptr);
}
