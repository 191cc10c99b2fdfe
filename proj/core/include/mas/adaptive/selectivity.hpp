#pragma once

#include <string>
#include <vector>

#include "mas/adaptive/settings.hpp"
#include "mas/adaptive/status_vector.hpp"
#include "mas/grid/network.hpp"

namespace mas::adaptive {

/// One failing replay case. `tripped` names the breaker that operated
/// wrongly, or "uncleared" (own breaker never opened) or "uncovered"
/// (no settings for the branch; position is then 0).
struct Violation {
  std::string branch;
  double position = 0.0;
  std::string tripped;

  bool operator==(const Violation&) const = default;
};

/// Replays bolted faults at each configured position on every closed
/// branch, protection only: branch relays with their stage timers and
/// breaker delay, DG undervoltage disconnects, no communication. A case
/// passes when the faulted branch's own breaker clears the fault and no
/// other breaker trips before that.
std::vector<Violation> verify_selectivity(const grid::Network& net, const DgStatusVector& v, const Settings& settings,
                                          const StudyConfig& cfg = {});

}  // namespace mas::adaptive
