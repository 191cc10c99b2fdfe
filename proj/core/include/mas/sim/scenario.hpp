#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mas/agents/central_agent.hpp"
#include "mas/comms/fabric.hpp"
#include "mas/grid/fault_solver.hpp"
#include "mas/grid/network.hpp"
#include "mas/sim_time.hpp"

namespace mas::sim {

struct SimConfig {
  SimTime cycle = SimTime::from_ms(10);
  SimTime breaker_time = SimTime::from_ms(40);
  SimTime horizon = SimTime::from_seconds(2.0);
  comms::FabricConfig fabric;
  agents::CentralConfig central;
};

/// `key=value` lines, `#` comments. Keys: cycle_ms, breaker_ms, horizon_s,
/// latency_tt_ms, latency_tr_ms, latency_rr_ms, latency_rc_ms, jitter,
/// jitter_seed, f0, k_f, f_min, v_min. Throws ConfigError.
SimConfig parse_config(std::string_view text);

struct FaultApply {
  grid::FaultSpec fault;
};
struct FaultClear {
  std::string branch;
};
struct DgSet {
  std::string id;
  std::optional<bool> online;
  std::optional<double> p;
  std::optional<double> q;
};
struct LoadSet {
  std::string id;
  bool connected = true;
};
struct ManualBreaker {
  std::string branch;
  bool open = true;
};
struct MeasureCycle {};
struct MessageDelivery {};
struct TimerExpiry {
  std::string agent;
  int timer = 0;
};

using EventBody =
    std::variant<FaultApply, FaultClear, DgSet, LoadSet, ManualBreaker, MeasureCycle, MessageDelivery, TimerExpiry>;

struct SimEvent {
  SimTime t;
  std::uint64_t seq = 0;
  EventBody body;
};

/// Disturbance lines only, in (t, file order). Throws ParseError or
/// UnknownElement.
std::vector<SimEvent> parse_scenario(std::string_view text, const grid::Network& net);

/// Disturbances plus a MeasureCycle every cycle in [0, horizon), sorted by
/// (t, seq). Disturbances take the lower sequence numbers, so a cycle at the
/// same instant already sees them.
std::vector<SimEvent> load_scenario(std::string_view text, const grid::Network& net, const SimConfig& cfg);

}  // namespace mas::sim
