#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mas/agents/event_log.hpp"
#include "mas/comms/fabric.hpp"
#include "mas/sim_time.hpp"

namespace mas::sim {

/// Agent id -> kind, as listed in a run log header.
using AgentDirectory = std::map<std::string, comms::AgentKind>;

struct FaultVerdict {
  std::string branch;
  SimTime applied;
  /// Seconds from the fault to the last opening of the faulted breaker.
  std::optional<double> clearing_s;
  bool selective = false;
  std::vector<std::string> wrong_trips;
};

struct Traffic {
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;
};

struct Metrics {
  std::map<std::string, int> trips;
  std::vector<FaultVerdict> faults;
  std::map<std::string, Traffic> per_mode;
  std::map<std::string, Traffic> per_link;
  std::vector<std::string> loads_shed;
  int dg_disconnects = 0;
  int group_changes = 0;

  bool all_selective() const;
  /// `key<TAB>value` lines sorted by key.
  std::string to_table() const;
};

/// Everything is derived from the two logs, so a report can rebuild it.
Metrics compute_metrics(const std::vector<agents::EventRecord>& events,
                        const std::vector<comms::MessageRecord>& messages, const AgentDirectory& agents);

/// Link class of a logged transmission; nullopt when an endpoint is unknown.
std::optional<comms::LinkClass> classify(const comms::MessageRecord& r, const AgentDirectory& agents);

}  // namespace mas::sim
