#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mas/agents/event_log.hpp"
#include "mas/comms/fabric.hpp"
#include "mas/sim/metrics.hpp"

namespace mas::sim {

struct RunLog {
  std::string network_hash;
  AgentDirectory agents;
  std::vector<agents::EventRecord> events;
  std::vector<comms::MessageRecord> messages;
};

/// Header (`#` lines with the network hash and agent directory), event
/// records, message records, and an `# end` trailer with both counts.
std::string write_log(const RunLog& log);

/// Throws ParseError, including for a missing or mismatched trailer.
RunLog read_log(std::string_view text);

agents::EventRecord parse_event(std::string_view line, std::size_t number);
comms::MessageRecord parse_message(std::string_view line, std::size_t number);

}  // namespace mas::sim
