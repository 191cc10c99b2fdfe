#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mas/comms/blackboard.hpp"
#include "mas/comms/layout.hpp"
#include "mas/comms/mode_rules.hpp"
#include "mas/comms/payload.hpp"
#include "mas/sim_time.hpp"

namespace mas::comms {

struct FabricConfig {
  SimTime latency_tt = SimTime::from_ms(1);
  SimTime latency_tr = SimTime::from_ms(2);
  SimTime latency_rr = SimTime::from_ms(2);
  SimTime latency_rc = SimTime::from_ms(2);
  /// Adds a uniform 0..1 ms delay per message drawn from a seeded generator.
  bool jitter = false;
  std::uint64_t jitter_seed = 1;
};

struct Message {
  std::uint64_t seq = 0;
  SimTime t_send;
  std::string sender;
  Mode mode = Mode::Direct;
  /// Receiver id (Direct), group id (Radio) or blackboard key.
  std::string dest;
  Payload payload;
  std::uint8_t priority = 0;
  std::size_t size_bytes = 0;
  LinkClass link = LinkClass::TerminalTerminal;
};

struct Delivery {
  SimTime arrival;
  std::string receiver;
  Message msg;
};

/// One accepted transmission, in send order.
struct MessageRecord {
  SimTime t;
  std::uint64_t seq;
  Mode mode;
  std::string from;
  std::string to;
  std::string_view type;
  std::size_t bytes;
};

/// "t=0.100000 seq=3 mode=DIRECT from=B1 to=B2 type=DIGEST bytes=13"
std::string format_record(const MessageRecord& r);

/// Mode-checked message transport with link latencies. Radio goes to every
/// group member except the sender; blackboard posts take effect on arrival.
class Fabric {
 public:
  Fabric(std::vector<AgentRef> agents, LinkTable links, FabricConfig cfg = {});

  /// Validates and schedules a message; returns its sequence number.
  /// Throws UnknownAgent, UnknownArea, ModeViolation, NoLink,
  /// SelectivityViolation or NotRegional.
  std::uint64_t send(SimTime now, std::string_view sender, Mode mode, std::string_view dest, Payload payload,
                     std::uint8_t priority = 128);

  /// Earliest pending arrival, if any.
  std::optional<SimTime> next_arrival() const;

  /// Pops every delivery with arrival <= now in (arrival, seq, receiver)
  /// order. Blackboard posts are applied here and not returned.
  std::vector<Delivery> deliver(SimTime now);

  const Blackboard& blackboard() const { return blackboard_; }
  const std::vector<MessageRecord>& records() const { return records_; }
  const AgentRef* agent(std::string_view id) const;
  const LinkTable& links() const { return links_; }

 private:
  struct Pending {
    SimTime arrival;
    std::uint64_t seq;
    std::string receiver;  // empty for blackboard posts
    bool operator<(const Pending& o) const {
      if (arrival != o.arrival) return arrival < o.arrival;
      if (seq != o.seq) return seq < o.seq;
      return receiver < o.receiver;
    }
  };

  SimTime latency(LinkClass c);

  std::map<std::string, AgentRef, std::less<>> agents_;
  LinkTable links_;
  FabricConfig cfg_;
  std::mt19937_64 rng_;
  std::uint64_t next_seq_ = 1;
  std::set<Pending> queue_;
  std::map<std::uint64_t, Message> in_flight_;
  std::map<std::uint64_t, int> remaining_;
  Blackboard blackboard_;
  std::vector<MessageRecord> records_;
};

}  // namespace mas::comms
