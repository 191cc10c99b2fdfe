#pragma once

#include <cstdint>
#include <string>

#include "mas/grid/measurement.hpp"

namespace mas::agents {

/// One stored parameter set of a three-stage directional overcurrent relay.
struct SettingGroup {
  std::uint16_t group_id = 0;
  double stage1_pickup = 0.0;
  double stage1_delay = 0.0;
  double stage2_pickup = 0.0;
  double stage2_delay = 0.3;
  double stage3_pickup = 0.0;
  double stage3_tms = 0.1;
  bool directional = false;
  bool reclose_enabled = true;
  double dead_time = 0.5;

  /// Empty when the invariants hold, otherwise the first broken one.
  std::string check() const;
  bool operator==(const SettingGroup&) const = default;
};

/// Standard inverse curve: tms * 0.14 / (M^0.02 - 1). Infinite for M <= 1.
double inverse_time(double tms, double multiple);

struct RelayDecision {
  int stage = 0;  // 0: no trip
  double delay = 0.0;

  bool trips() const { return stage != 0; }
};

/// Stage selection for current `i` (max phase) seen with `dir`.
RelayDecision decide(const SettingGroup& g, double i, grid::Direction dir);

}  // namespace mas::agents
