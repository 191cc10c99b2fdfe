#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mas/comms/mode_rules.hpp"
#include "mas/comms/payload.hpp"
#include "mas/sim_time.hpp"

namespace mas::agents {

struct Outgoing {
  comms::Mode mode = comms::Mode::Direct;
  std::string dest;
  comms::Payload payload;
  std::uint8_t priority = 128;
};

struct TimerRequest {
  SimTime at;
  int timer = 0;
};

/// Change an agent makes to the physical plant.
struct PlantAction {
  enum class Kind { BreakerOpen, BreakerClose, DgOffline, DgOnline, DgSetpoint, LoadDisconnect };
  Kind kind = Kind::BreakerOpen;
  std::string element;
  double p = 0.0;
  double q = 0.0;
};

/// Everything an agent handler wants done after it returns.
struct Actions {
  std::vector<Outgoing> messages;
  std::vector<TimerRequest> timers;
  std::vector<PlantAction> plant;

  void append(Actions&& o);
  bool empty() const { return messages.empty() && timers.empty() && plant.empty(); }
};

}  // namespace mas::agents
