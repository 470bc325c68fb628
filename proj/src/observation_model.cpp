#include "immpc/observation_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace immpc {

const char* to_string(Observation o) {
  switch (o) {
    case Observation::contact: return "CONTACT";
    case Observation::no_contact: return "NO_CONTACT";
    case Observation::beacon: return "BEACON";
    case Observation::no_beacon: return "NO_BEACON";
  }
  return "?";
}

Observation observation_from_string(std::string_view s) {
  if (s == "CONTACT") return Observation::contact;
  if (s == "NO_CONTACT") return Observation::no_contact;
  if (s == "BEACON") return Observation::beacon;
  if (s == "NO_BEACON") return Observation::no_beacon;
  throw std::invalid_argument("unknown observation '" + std::string(s) + "'");
}

ActionSet::ActionSet(std::vector<ActionType> actions) : actions_(std::move(actions)) {
  for (std::size_t i = 0; i < actions_.size(); ++i)
    if (actions_[i].id != static_cast<ActionId>(i))
      throw ModelError("action ids must be dense 0..|A|-1");
}

ActionSet ActionSet::leop() {
  return ActionSet({{0, "contact", true}, {1, "beacon", true}, {2, "recover", true}});
}

std::optional<ActionId> ActionSet::find(std::string_view name) const {
  for (const auto& a : actions_)
    if (a.name == name) return a.id;
  return std::nullopt;
}

ActionId ActionSet::index_of(std::string_view name) const {
  if (auto a = find(name)) return *a;
  throw ModelError("unknown action '" + std::string(name) + "'");
}

void LinkModel::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(gamma) || !prob(p_b) || !prob(epsilon))
    throw ModelError("link model probabilities must lie in [0,1]");
  if (!(e_floor_deg > 0.0) || e_floor_deg > 90.0)
    throw ModelError("elevation floor must lie in (0, 90] degrees");
}

double link_probability(const LinkModel& link, double e_max_deg) {
  const double e = std::max(e_max_deg, link.e_floor_deg);
  const double f_elev = std::log(std::sin(e * std::numbers::pi / 180.0));
  const double x = link.beta0 + link.beta_e * f_elev;
  return 1.0 / (1.0 + std::exp(-x));
}

LikelihoodTable::LikelihoodTable(std::size_t modes, std::size_t actions)
    : modes_(modes), actions_(actions), entries_(modes * actions) {}

LikelihoodTable LikelihoodTable::leop(const ModeSet& modes, const ActionSet& actions,
                                      const LinkModel& link) {
  LikelihoodTable t(modes.size(), actions.size());
  const ActionId contact = actions.index_of("contact");
  const ActionId beacon = actions.index_of("beacon");
  const auto recover = actions.find("recover");

  auto contact_row = [&](double scale) {
    return LikelihoodEntry{Observation::contact, Observation::no_contact, 0.0, scale};
  };
  auto beacon_row = [&](double p) {
    return LikelihoodEntry{Observation::beacon, Observation::no_beacon, p, 0.0};
  };

  const ModeId ok = modes.index_of("OK");
  const ModeId gnc = modes.index_of("GNC");
  const ModeId comms = modes.index_of("COMMS");
  const ModeId dep = modes.index_of("DEP");
  const ModeId dead = modes.index_of("DEAD");

  t.set(ok, contact, contact_row(1.0));
  t.set(gnc, contact, contact_row(link.gamma));
  t.set(comms, contact, contact_row(0.0));
  t.set(dep, contact, contact_row(0.0));
  t.set(dead, contact, contact_row(0.0));

  t.set(ok, beacon, beacon_row(link.p_b));
  t.set(gnc, beacon, beacon_row(link.p_b));
  t.set(comms, beacon, beacon_row(link.p_b));
  t.set(dep, beacon, beacon_row(link.epsilon));
  t.set(dead, beacon, beacon_row(0.0));

  if (recover) {
    for (const FaultMode& m : modes.modes())
      t.set(m.id, *recover, LikelihoodEntry{Observation::no_contact, Observation::contact, 1.0, 0.0});
  }
  return t;
}

void LikelihoodTable::set(ModeId m, ActionId a, LikelihoodEntry e) {
  if (m < 0 || a < 0 || static_cast<std::size_t>(m) >= modes_ ||
      static_cast<std::size_t>(a) >= actions_)
    throw std::out_of_range("likelihood entry index out of range");
  if (e.positive == e.negative) throw ModelError("likelihood entry needs two distinct symbols");
  entries_[static_cast<std::size_t>(m) * actions_ + static_cast<std::size_t>(a)] = e;
}

const LikelihoodEntry* LikelihoodTable::find(ModeId m, ActionId a) const {
  if (m < 0 || a < 0 || static_cast<std::size_t>(m) >= modes_ ||
      static_cast<std::size_t>(a) >= actions_)
    return nullptr;
  const auto& e = entries_[static_cast<std::size_t>(m) * actions_ + static_cast<std::size_t>(a)];
  return e ? &*e : nullptr;
}

const LikelihoodEntry& LikelihoodTable::at(ModeId m, ActionId a) const {
  if (const LikelihoodEntry* e = find(m, a)) return *e;
  throw std::out_of_range("no likelihood entry for mode " + std::to_string(m) + ", action " +
                          std::to_string(a));
}

ObservationVector LikelihoodTable::row(ModeId m, ActionId a, double p_link) const {
  const LikelihoodEntry& e = at(m, a);
  const double p = std::clamp(e.constant + e.link_scale * p_link, 0.0, 1.0);
  ObservationVector v{};
  v[static_cast<std::size_t>(e.positive)] = p;
  v[static_cast<std::size_t>(e.negative)] = 1.0 - p;
  return v;
}

ObservationVector likelihood(const LikelihoodTable& table, ModeId mode, ActionId action,
                             double p_link) {
  return table.row(mode, action, p_link);
}

bool is_aliased(const LikelihoodTable& table, ModeId a, ModeId b, ActionId action, double p_link) {
  const ObservationVector ra = table.row(a, action, p_link);
  const ObservationVector rb = table.row(b, action, p_link);
  for (std::size_t o = 0; o < kObservationCount; ++o)
    if (std::abs(ra[o] - rb[o]) > 1e-12) return false;
  return true;
}

std::vector<ActionId> disambiguating_actions(const LikelihoodTable& table, ModeId a, ModeId b,
                                             double p_link) {
  std::vector<ActionId> out;
  for (std::size_t act = 0; act < table.actions(); ++act) {
    const auto id = static_cast<ActionId>(act);
    if (!table.find(a, id) || !table.find(b, id)) continue;
    if (!is_aliased(table, a, b, id, p_link)) out.push_back(id);
  }
  return out;
}

}  // namespace immpc
