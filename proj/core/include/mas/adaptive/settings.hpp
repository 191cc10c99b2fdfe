#pragma once

#include <map>
#include <string>
#include <vector>

#include "mas/adaptive/status_vector.hpp"
#include "mas/agents/setting_group.hpp"
#include "mas/grid/network.hpp"
#include "mas/sim_time.hpp"

namespace mas::adaptive {

struct StudyConfig {
  double k_rel = 1.3;
  double k_coord = 1.1;
  double grading = 0.3;
  double load_factor = 1.2;
  double pickup_floor = 0.1;
  /// Remote-end fault current must reach this multiple of stage-3 pickup.
  double k_sens = 1.5;
  double tms_min = 0.1;
  double tms_max = 1.0;
  double dead_time = 0.5;

  /// Selectivity replay.
  std::vector<double> positions{0.1, 0.5, 0.9};
  SimTime window = SimTime::from_seconds(3.0);
  SimTime cycle = SimTime::from_ms(10);
  SimTime breaker_time = SimTime::from_ms(40);
  double dg_uv_threshold = 0.5;
  SimTime dg_uv_time = SimTime::from_ms(160);
};

using Settings = std::map<std::string, agents::SettingGroup>;

struct SettingsResult {
  Settings groups;
  /// "ordering", "grading", "sensitivity" or "topology"; empty when feasible.
  std::string reason;
  std::string detail;

  bool feasible() const { return reason.empty(); }
};

/// Graded three-stage settings for every closed branch with the DGs set
/// per `v`. Never throws for an infeasible study; the reason is returned.
SettingsResult compute_settings(const grid::Network& net, const DgStatusVector& v, const StudyConfig& cfg = {});

/// Shortest operating time of a relay at current `i` in its forward
/// direction; infinity when no stage picks up.
double operating_time(const agents::SettingGroup& g, double i);

}  // namespace mas::adaptive
