#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "mas/comms/mode_rules.hpp"
#include "mas/comms/payload.hpp"
#include "mas/sim_time.hpp"

namespace mas::comms {

struct BlackboardEntry {
  Payload value;
  std::uint8_t priority = 0;
  std::string writer;
  SimTime t_post;
};

/// Shared key/value area for regional agents. Each key keeps the post that
/// is greatest under (priority, t_post, smallest writer id); on a full tie
/// the later post replaces the earlier one.
class Blackboard {
 public:
  /// Returns true when the post replaced (or created) the entry.
  /// Throws NotRegional for any writer that is not a regional agent.
  bool post(std::string_view key, Payload value, std::uint8_t priority, std::string_view writer,
            AgentKind writer_kind, SimTime t);

  const BlackboardEntry* read(std::string_view key) const;
  const std::map<std::string, BlackboardEntry, std::less<>>& entries() const { return entries_; }

  /// True when (p1, t1, w1) outranks (p2, t2, w2).
  static bool outranks(std::uint8_t p1, SimTime t1, std::string_view w1, std::uint8_t p2, SimTime t2,
                       std::string_view w2);

 private:
  std::map<std::string, BlackboardEntry, std::less<>> entries_;
};

}  // namespace mas::comms
