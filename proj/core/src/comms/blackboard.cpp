#include "mas/comms/blackboard.hpp"

#include "mas/error.hpp"

namespace mas::comms {

bool Blackboard::outranks(std::uint8_t p1, SimTime t1, std::string_view w1, std::uint8_t p2, SimTime t2,
                          std::string_view w2) {
  if (p1 != p2) return p1 > p2;
  if (t1 != t2) return t1 > t2;
  return w1 < w2;
}

bool Blackboard::post(std::string_view key, Payload value, std::uint8_t priority, std::string_view writer,
                      AgentKind writer_kind, SimTime t) {
  if (writer_kind != AgentKind::Regional) {
    throw NotRegional("agent '" + std::string(writer) + "' may not write the blackboard");
  }
  auto it = entries_.find(key);
  // A full tie is the same writer updating its own entry: the later post wins.
  if (it != entries_.end() &&
      outranks(it->second.priority, it->second.t_post, it->second.writer, priority, t, writer)) {
    return false;
  }
  BlackboardEntry e{std::move(value), priority, std::string(writer), t};
  if (it == entries_.end()) {
    entries_.emplace(std::string(key), std::move(e));
  } else {
    it->second = std::move(e);
  }
  return true;
}

const BlackboardEntry* Blackboard::read(std::string_view key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

}  // namespace mas::comms
