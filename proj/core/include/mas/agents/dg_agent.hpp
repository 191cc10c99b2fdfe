#pragma once

#include <optional>
#include <string>

#include "mas/agents/actions.hpp"
#include "mas/agents/event_log.hpp"
#include "mas/comms/payload.hpp"
#include "mas/grid/network.hpp"
#include "mas/sim_time.hpp"

namespace mas::agents {

struct DgAgentConfig {
  double uv_threshold = 0.5;
  SimTime uv_time = SimTime::from_ms(160);
  SimTime instruction_max_age = SimTime::from_ms(500);
};

struct DgAgentDb {
  std::string source_id;
  bool online = true;
  double p_out = 0.0;
  double q_out = 0.0;
  double v_terminal = 1.0;
  /// Seconds the terminal voltage has been below the threshold.
  double undervoltage_timer = 0.0;
};

/// Terminal agent of one DG: undervoltage disconnect plus explicit
/// connect, disconnect and dispatch orders. Reports to its regional agent
/// whenever its state changes.
class DgAgent {
 public:
  DgAgent(const grid::Source& src, DgAgentConfig cfg = {}, EventLog* log = nullptr);

  const std::string& id() const { return db_.source_id; }
  const DgAgentDb& db() const { return db_; }
  void set_regional(std::string regional) { regional_ = std::move(regional); }

  /// Called once per measurement cycle with the solved terminal voltage.
  Actions dg_protect(double v_terminal, SimTime now);
  /// Throws StaleInstruction or AlreadyInState.
  Actions on_instruction(const comms::Instruction& instr, SimTime issued, SimTime now);
  /// Setpoints are clamped to the unit's ratings.
  Actions on_dispatch(const comms::DgDispatch& d, SimTime now);
  /// Operator-driven changes from a scenario.
  Actions set_online(bool online, SimTime now, std::string_view cause);
  Actions set_output(std::optional<double> p, std::optional<double> q, SimTime now);

 private:
  Actions go(bool online, SimTime now, std::string_view cause);
  Actions report() const;
  void log(SimTime t, EventKind kind, Detail detail);

  DgAgentDb db_;
  double p_max_;
  double q_max_;
  DgAgentConfig cfg_;
  EventLog* log_;
  std::string regional_;
  std::optional<SimTime> uv_since_;
};

}  // namespace mas::agents
