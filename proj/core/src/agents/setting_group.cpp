#include "mas/agents/setting_group.hpp"

#include <cmath>
#include <limits>

namespace mas::agents {

std::string SettingGroup::check() const {
  if (!(stage3_pickup > 0.0)) return "stage3_pickup must be positive";
  if (!(stage2_pickup > stage3_pickup)) return "stage2_pickup must exceed stage3_pickup";
  if (!(stage1_pickup > stage2_pickup)) return "stage1_pickup must exceed stage2_pickup";
  if (stage1_delay < 0.0) return "stage1_delay must not be negative";
  if (stage2_delay < 0.3 - 1e-12) return "stage2_delay must be at least 0.3 s";
  if (!(stage3_tms > 0.0)) return "tms must be positive";
  if (dead_time < 0.0) return "dead_time must not be negative";
  return {};
}

double inverse_time(double tms, double multiple) {
  if (!(multiple > 1.0)) return std::numeric_limits<double>::infinity();
  return tms * 0.14 / (std::pow(multiple, 0.02) - 1.0);
}

RelayDecision decide(const SettingGroup& g, double i, grid::Direction dir) {
  if (g.directional && dir == grid::Direction::Reverse) return {};
  if (i >= g.stage1_pickup) return {1, g.stage1_delay};
  if (i >= g.stage2_pickup) return {2, g.stage2_delay};
  if (i >= g.stage3_pickup) {
    // At exactly the pickup the curve is infinite: picked up, never operates.
    return {3, inverse_time(g.stage3_tms, i / g.stage3_pickup)};
  }
  return {};
}

}  // namespace mas::agents
