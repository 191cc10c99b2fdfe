#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mas/agents/actions.hpp"
#include "mas/agents/event_log.hpp"
#include "mas/comms/blackboard.hpp"
#include "mas/comms/layout.hpp"
#include "mas/comms/payload.hpp"
#include "mas/sim_time.hpp"

namespace mas::agents {

/// Maps a DG status bitstring to branch -> group id. Throws when the
/// vector has no usable entry.
using KbLookup = std::function<std::map<std::string, std::uint16_t>(const std::string& bits)>;

/// Bitstring read as binary, first DG most significant.
std::uint16_t vector_code(std::string_view bits);

struct AreaLoad {
  std::string id;
  double p = 0.0;
  bool connected = true;
};

struct RegionalConfig {
  std::uint8_t bb_priority = 200;
  double v_alarm = 0.9;
};

struct RegionalDb {
  std::string area_id;
  std::vector<std::string> members;
  /// Every DG in the network; other areas' entries come from the blackboard.
  std::map<std::string, bool> dg_status;
  std::map<std::string, std::uint16_t> last_distributed;
  std::vector<comms::AreaSummary> summaries;
};

/// Area gateway: keeps the DG status vector, swaps setting groups through
/// the knowledge base, summarizes the area for the central agent and
/// relays central orders to its terminals.
class RegionalAgent {
 public:
  RegionalAgent(comms::Area area, std::map<std::string, bool> dg_status, std::map<std::string, double> dg_p,
                KbLookup lookup,
                std::map<std::string, std::uint16_t> assignment, std::map<std::string, std::string> terminal_bus,
                std::vector<AreaLoad> loads, RegionalConfig cfg = {}, EventLog* log = nullptr);

  const std::string& id() const { return area_.regional_id; }
  const comms::Area& area() const { return area_; }
  const RegionalDb& db() const { return db_; }
  /// "1" per online DG, lexicographic DG order.
  std::string vector_bits() const;
  int lookups() const { return lookups_; }

  /// Throws NotMember for senders outside the area.
  Actions on_digest(const std::string& sender, const comms::StatusDigest& d, SimTime now);
  /// Central orders and operator instructions; forwarded by radio when the
  /// addressee is one of this area's own terminals.
  Actions on_order(const comms::Payload& p, SimTime now);
  /// Merges DG states other regionals published.
  Actions poll_blackboard(const comms::Blackboard& bb, SimTime now);

 private:
  Actions adapt(SimTime now);
  Actions summarize(SimTime now);
  bool owns(const std::string& terminal) const;
  void log(SimTime t, EventKind kind, Detail detail);

  comms::Area area_;
  RegionalDb db_;
  KbLookup lookup_;
  std::map<std::string, std::string> terminal_bus_;
  std::vector<AreaLoad> loads_;
  RegionalConfig cfg_;
  EventLog* log_;
  std::string looked_up_bits_;
  int lookups_ = 0;
  std::map<std::string, double> dg_p_;
  std::map<std::string, double> v_;
  bool v_low_ = false;
};

}  // namespace mas::agents
