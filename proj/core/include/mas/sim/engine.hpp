#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mas/adaptive/knowledge.hpp"
#include "mas/agents/branch_agent.hpp"
#include "mas/grid/network.hpp"
#include "mas/sim/metrics.hpp"
#include "mas/sim/run_log.hpp"
#include "mas/sim/scenario.hpp"

namespace mas::sim {

struct FinalState {
  grid::Network plant;
  std::map<std::string, agents::BreakerStatus> breakers;
  std::map<std::string, std::uint16_t> active_groups;
  std::map<std::string, bool> dg_online;
  double frequency = 50.0;
};

struct RunResult {
  RunLog log;
  Metrics metrics;
  FinalState final_state;
};

/// Where relay settings come from. With a knowledge base the regional
/// agents swap groups as DG status changes; `static_bits` freezes the
/// settings of one vector instead. Without a knowledge base the settings
/// are computed for the starting (or frozen) vector.
struct SettingsSource {
  const adaptive::KnowledgeBase* kb = nullptr;
  std::optional<std::string> static_bits;
};

/// Single-threaded discrete-event run over one network and scenario.
class Simulation {
 public:
  /// Throws ConfigError or HashMismatch.
  Simulation(const grid::Network& net, SettingsSource settings, std::vector<SimEvent> events, SimConfig cfg);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Pops and applies one event. Returns false once nothing is left
  /// before the horizon.
  bool step();
  SimTime now() const;
  RunResult finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

RunResult run(const grid::Network& net, SettingsSource settings, std::vector<SimEvent> events, const SimConfig& cfg);

}  // namespace mas::sim
