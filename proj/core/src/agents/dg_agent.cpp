#include "mas/agents/dg_agent.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "mas/error.hpp"

namespace mas::agents {

DgAgent::DgAgent(const grid::Source& src, DgAgentConfig cfg, EventLog* log)
    : p_max_(src.p_max), q_max_(src.q_max), cfg_(cfg), log_(log) {
  db_.source_id = src.id;
  db_.online = src.online;
  db_.p_out = std::clamp(src.p_out, 0.0, p_max_);
  db_.q_out = std::clamp(src.q_out, -q_max_, q_max_);
}

void DgAgent::log(SimTime t, EventKind kind, Detail detail) {
  if (log_) log_->append(t, db_.source_id, kind, std::move(detail));
}

Actions DgAgent::report() const {
  Actions out;
  if (regional_.empty()) return out;
  comms::StatusDigest d;
  d.source_id = db_.source_id;
  d.breaker_status = db_.online ? comms::BreakerCode::Closed : comms::BreakerCode::Open;
  d.i_mag_a = db_.online ? db_.p_out : 0.0;
  d.v_mag = db_.v_terminal;
  out.messages.push_back({comms::Mode::Direct, regional_, d});
  return out;
}

Actions DgAgent::go(bool online, SimTime now, std::string_view cause) {
  db_.online = online;
  uv_since_.reset();
  db_.undervoltage_timer = 0.0;
  Actions out;
  if (online) {
    out.plant.push_back({PlantAction::Kind::DgOnline, db_.source_id});
    log(now, EventKind::DgOn, {{"cause", std::string(cause)}});
  } else {
    out.plant.push_back({PlantAction::Kind::DgOffline, db_.source_id});
    log(now, EventKind::DgOff, {{"cause", std::string(cause)}});
  }
  out.append(report());
  return out;
}

Actions DgAgent::dg_protect(double v_terminal, SimTime now) {
  db_.v_terminal = v_terminal;
  if (!db_.online) return {};
  if (v_terminal >= cfg_.uv_threshold) {
    uv_since_.reset();
    db_.undervoltage_timer = 0.0;
    return {};
  }
  if (!uv_since_) uv_since_ = now;
  db_.undervoltage_timer = (now - *uv_since_).seconds();
  if (now - *uv_since_ < cfg_.uv_time) return {};
  return go(false, now, "undervoltage");
}

Actions DgAgent::on_instruction(const comms::Instruction& instr, SimTime issued, SimTime now) {
  if (instr.target != db_.source_id) return {};
  if (now - issued >= cfg_.instruction_max_age) {
    throw StaleInstruction(fmt::format("{}: instruction issued at {} is stale at {}", db_.source_id,
                                       format_seconds(issued), format_seconds(now)));
  }
  switch (instr.action) {
    case comms::Action::DgDisconnect:
      if (!db_.online) throw AlreadyInState(fmt::format("{}: already offline", db_.source_id));
      return go(false, now, "instruction");
    case comms::Action::DgConnect:
      if (db_.online) throw AlreadyInState(fmt::format("{}: already online", db_.source_id));
      return go(true, now, "instruction");
    default:
      return {};
  }
}

Actions DgAgent::on_dispatch(const comms::DgDispatch& d, SimTime now) {
  if (d.dg_id != db_.source_id) return {};
  return set_output(d.p, d.q, now);
}

Actions DgAgent::set_online(bool online, SimTime now, std::string_view cause) {
  if (online == db_.online) return {};
  return go(online, now, cause);
}

Actions DgAgent::set_output(std::optional<double> p, std::optional<double> q, SimTime now) {
  const double new_p = p ? std::clamp(*p, 0.0, p_max_) : db_.p_out;
  const double new_q = q ? std::clamp(*q, -q_max_, q_max_) : db_.q_out;
  if (new_p == db_.p_out && new_q == db_.q_out) return {};
  db_.p_out = new_p;
  db_.q_out = new_q;
  Actions out;
  out.plant.push_back({PlantAction::Kind::DgSetpoint, db_.source_id, new_p, new_q});
  log(now, EventKind::DgDispatch, {{"p", analog(new_p)}, {"q", analog(new_q)}});
  if (db_.online) out.append(report());
  return out;
}

}  // namespace mas::agents
