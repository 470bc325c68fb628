#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "immpc/fault_model.hpp"

namespace immpc {

enum class Observation : std::uint8_t { contact = 0, no_contact = 1, beacon = 2, no_beacon = 3 };
inline constexpr std::size_t kObservationCount = 4;
using ObservationVector = std::array<double, kObservationCount>;

const char* to_string(Observation o);
Observation observation_from_string(std::string_view s);

struct ActionType {
  ActionId id = 0;
  std::string name;
  bool consumes_slot = true;
};

class ActionSet {
 public:
  ActionSet() = default;
  explicit ActionSet(std::vector<ActionType> actions);

  // contact, beacon and recover, in that order.
  static ActionSet leop();

  std::size_t size() const { return actions_.size(); }
  const ActionType& operator[](ActionId a) const { return actions_.at(static_cast<std::size_t>(a)); }
  const std::vector<ActionType>& actions() const { return actions_; }
  std::optional<ActionId> find(std::string_view name) const;
  ActionId index_of(std::string_view name) const;

 private:
  std::vector<ActionType> actions_;
};

// Logit link model on peak elevation plus the remaining observation constants.
struct LinkModel {
  double beta0 = 0.8;
  double beta_e = 1.5;
  double e_floor_deg = 5.0;
  double gamma = 0.4;
  double p_b = 0.8;
  double epsilon = 0.05;

  void validate() const;
};

double link_probability(const LinkModel& link, double e_max_deg);

// One (mode, action) row: P(positive) = constant + link_scale * p_link and
// P(negative) is the complement; other symbols get zero mass.
struct LikelihoodEntry {
  Observation positive = Observation::contact;
  Observation negative = Observation::no_contact;
  double constant = 0.0;
  double link_scale = 0.0;
};

class LikelihoodTable {
 public:
  LikelihoodTable() = default;
  LikelihoodTable(std::size_t modes, std::size_t actions);

  // Observation likelihoods for the LEOP mode set: contact rows scale with
  // p_link (gamma for GNC), beacon rows use p_b / epsilon, recover is silent.
  static LikelihoodTable leop(const ModeSet& modes, const ActionSet& actions, const LinkModel& link);

  void set(ModeId m, ActionId a, LikelihoodEntry e);
  const LikelihoodEntry* find(ModeId m, ActionId a) const;
  const LikelihoodEntry& at(ModeId m, ActionId a) const;  // throws std::out_of_range
  ObservationVector row(ModeId m, ActionId a, double p_link) const;
  std::size_t modes() const { return modes_; }
  std::size_t actions() const { return actions_; }

 private:
  std::size_t modes_ = 0;
  std::size_t actions_ = 0;
  std::vector<std::optional<LikelihoodEntry>> entries_;
};

ObservationVector likelihood(const LikelihoodTable& table, ModeId mode, ActionId action, double p_link);

bool is_aliased(const LikelihoodTable& table, ModeId a, ModeId b, ActionId action, double p_link);

std::vector<ActionId> disambiguating_actions(const LikelihoodTable& table, ModeId a, ModeId b,
                                             double p_link);

}  // namespace immpc
