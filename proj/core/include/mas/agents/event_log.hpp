#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mas/sim_time.hpp"

namespace mas::agents {

/// Record kinds. The last five are produced by the simulator and the
/// supervision layer rather than by breakers.
enum class EventKind {
  Trip,
  Close,
  Open,
  Reclose,
  Lockout,
  DgOff,
  DgOn,
  DgDispatch,
  Shed,
  GroupChange,
  Alarm,
  Fault,
  Clear,
  Load,
};

std::string_view to_string(EventKind k);
bool parse_event_kind(std::string_view s, EventKind& out);

using Detail = std::vector<std::pair<std::string, std::string>>;

struct EventRecord {
  SimTime t;
  std::string agent;
  EventKind kind = EventKind::Alarm;
  Detail detail;

  /// Value of a detail key, or empty.
  std::string get(std::string_view key) const;
};

/// "t=0.110000 agent=B2 event=TRIP detail=stage=1 i=2.5000"
std::string format_event(const EventRecord& r);

/// Shared append-only log. Records must arrive in non-decreasing time;
/// records with equal time keep insertion order.
class EventLog {
 public:
  void append(EventRecord r);
  void append(SimTime t, std::string agent, EventKind kind, Detail detail = {});
  const std::vector<EventRecord>& records() const { return records_; }

 private:
  std::vector<EventRecord> records_;
};

/// Fixed four-decimal rendering used for analogs in event details.
std::string analog(double v);

}  // namespace mas::agents
