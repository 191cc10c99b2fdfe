#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mas/agents/actions.hpp"
#include "mas/agents/event_log.hpp"
#include "mas/agents/setting_group.hpp"
#include "mas/comms/payload.hpp"
#include "mas/grid/measurement.hpp"
#include "mas/sim_time.hpp"

namespace mas::agents {

enum class Position : std::uint8_t { Open, Closed };
enum class SubState : std::uint8_t { Normal, Reclosing, ManualOperation, LockedOut };

std::string_view to_string(Position p);
std::string_view to_string(SubState s);

struct BreakerStatus {
  Position position = Position::Closed;
  SubState sub_state = SubState::Normal;
};

struct BranchAgentConfig {
  double alpha = 0.8;
  SimTime cycle = SimTime::from_ms(10);
  SimTime breaker_time = SimTime::from_ms(40);
  SimTime reclose_window = SimTime::from_ms(200);
  SimTime instruction_max_age = SimTime::from_ms(500);
  SimTime digest_period = SimTime::from_ms(100);
  /// Analog change that makes a digest worth sending early.
  double digest_delta = 0.05;
};

struct BranchAgentDb {
  std::string branch_id;
  BreakerStatus breaker;
  std::array<double, 3> i_mag{};
  std::array<double, 3> v_mag{1.0, 1.0, 1.0};
  grid::Direction direction = grid::Direction::Undetermined;
  std::uint16_t active_group = 0;
  std::map<std::uint16_t, SettingGroup> groups;
  std::vector<EventRecord> events;
  int switch_count = 0;
  std::map<std::string, comms::StatusDigest> neighbor_digests;
};

/// Terminal agent of one branch breaker: collect -> preprocess -> analyze
/// -> act, with per-stage timers and single-shot reclosing.
class BranchAgent {
 public:
  enum Timer : int { kBreakerOpen = 1, kReclose = 2, kWindowEnd = 3 };

  BranchAgent(std::string branch_id, std::map<std::uint16_t, SettingGroup> groups, std::uint16_t active_group,
              BranchAgentConfig cfg = {}, EventLog* log = nullptr);

  const std::string& id() const { return db_.branch_id; }
  const BranchAgentDb& db() const { return db_; }
  const BranchAgentConfig& config() const { return cfg_; }

  /// Peers for digests: adjacent branch agents and the home regional.
  void set_peers(std::vector<std::string> terminals, std::string regional);

  void collect(const grid::Measurement& m);
  void preprocess();
  RelayDecision analyze() const;

  /// Advances the stage timers for this cycle; trips when one expires.
  Actions protection_step(SimTime now);
  Actions on_timer(int timer, SimTime now);
  /// Throws StaleInstruction or AlreadyInState.
  Actions execute_instruction(const comms::Instruction& instr, SimTime issued, SimTime now);
  /// This agent switches the load's feeder.
  Actions on_shed(const comms::LoadShedOrder& order, SimTime now);
  /// Returns true when the active group changed. Repeats of the last
  /// (group, vector) pair are dropped.
  bool apply_group(std::uint16_t group_id, std::uint16_t vector_code, SimTime now);
  void receive_digest(const comms::StatusDigest& d);
  /// Periodic and change-driven digests to peers.
  Actions digests(SimTime now);

 private:
  const SettingGroup& active() const;
  double current() const;
  void log(SimTime t, EventKind kind, Detail detail);
  Actions open_breaker();
  comms::StatusDigest snapshot() const;

  BranchAgentDb db_;
  BranchAgentConfig cfg_;
  EventLog* log_;

  std::optional<grid::Measurement> staged_;
  std::array<std::optional<SimTime>, 3> stage_start_;
  bool trip_latched_ = false;
  std::optional<SimTime> open_due_;
  std::optional<SimTime> reclose_due_;
  std::optional<SimTime> window_end_;
  bool pickup_in_window_ = false;
  std::optional<SimTime> last_group_change_;
  std::optional<std::pair<std::uint16_t, std::uint16_t>> last_update_;

  std::vector<std::string> terminal_peers_;
  std::string regional_;
  std::optional<comms::StatusDigest> last_tt_;
  std::optional<SimTime> last_tt_time_;
  comms::StatusDigest last_tr_;
};

}  // namespace mas::agents
