#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "immpc/geometry.hpp"

namespace immpc {

struct Schedule {
  std::vector<int> selected;  // window ids with x_w = 1, ascending
  double objective = 0.0;
  double value_term = 0.0;
  double info_term = 0.0;
  bool proven_optimal = false;
  std::uint64_t nodes = 0;
};

// Earliest-starting selected window; ties go to the smaller id.
std::optional<int> next_action(const Schedule& schedule, std::span<const ContactWindow> windows);

}  // namespace immpc
