#include "mas/agents/regional_agent.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "mas/error.hpp"

namespace mas::agents {

std::uint16_t vector_code(std::string_view bits) {
  std::uint16_t code = 0;
  for (char c : bits) code = static_cast<std::uint16_t>((code << 1) | (c == '1' ? 1 : 0));
  return code;
}

RegionalAgent::RegionalAgent(comms::Area area, std::map<std::string, bool> dg_status,
                             std::map<std::string, double> dg_p, KbLookup lookup,
                             std::map<std::string, std::uint16_t> assignment,
                             std::map<std::string, std::string> terminal_bus, std::vector<AreaLoad> loads,
                             RegionalConfig cfg, EventLog* log)
    : area_(std::move(area)),
      lookup_(std::move(lookup)),
      terminal_bus_(std::move(terminal_bus)),
      loads_(std::move(loads)),
      cfg_(cfg),
      log_(log),
      dg_p_(std::move(dg_p)) {
  db_.area_id = area_.id;
  db_.members = area_.terminals();
  db_.dg_status = std::move(dg_status);
  db_.last_distributed = std::move(assignment);
  looked_up_bits_ = vector_bits();
}

void RegionalAgent::log(SimTime t, EventKind kind, Detail detail) {
  if (log_) log_->append(t, area_.regional_id, kind, std::move(detail));
}

std::string RegionalAgent::vector_bits() const {
  std::string bits;
  for (const auto& [id, on] : db_.dg_status) bits += on ? '1' : '0';
  return bits;
}

bool RegionalAgent::owns(const std::string& terminal) const {
  const auto& hb = area_.home_branches;
  const auto& dg = area_.dgs;
  return std::find(hb.begin(), hb.end(), terminal) != hb.end() || std::find(dg.begin(), dg.end(), terminal) != dg.end();
}

Actions RegionalAgent::on_digest(const std::string& sender, const comms::StatusDigest& d, SimTime now) {
  if (std::find(db_.members.begin(), db_.members.end(), sender) == db_.members.end()) {
    throw NotMember(fmt::format("{} is not a member of area {}", sender, area_.id));
  }
  if (d.v_mag) v_[sender] = *d.v_mag;

  const bool is_dg = std::find(area_.dgs.begin(), area_.dgs.end(), sender) != area_.dgs.end();
  if (is_dg) {
    const bool on = d.breaker_status == comms::BreakerCode::Closed;
    if (on) dg_p_[sender] = d.i_mag_a;
    if (db_.dg_status[sender] != on) {
      db_.dg_status[sender] = on;
      Actions out = adapt(now);
      out.append(summarize(now));
      v_low_ = std::any_of(v_.begin(), v_.end(), [&](const auto& kv) { return kv.second < cfg_.v_alarm; });
      return out;
    }
  }
  const bool low = std::any_of(v_.begin(), v_.end(), [&](const auto& kv) { return kv.second < cfg_.v_alarm; });
  if (low != v_low_) {
    v_low_ = low;
    return summarize(now);
  }
  return {};
}

Actions RegionalAgent::adapt(SimTime now) {
  Actions out;
  const std::string bits = vector_bits();
  if (!lookup_ || bits == looked_up_bits_) return out;
  looked_up_bits_ = bits;
  ++lookups_;
  std::map<std::string, std::uint16_t> assignment;
  try {
    assignment = lookup_(bits);
  } catch (const std::exception&) {
    log(now, EventKind::Alarm, {{"reason", "lookup"}, {"vector", bits}});
    return out;
  }
  const std::uint16_t code = vector_code(bits);
  for (const auto& b : area_.home_branches) {
    auto it = assignment.find(b);
    if (it == assignment.end()) continue;
    auto& last = db_.last_distributed[b];
    if (last == it->second) continue;
    last = it->second;
    out.messages.push_back({comms::Mode::Radio, area_.id, comms::SettingGroupUpdate{b, it->second, code}});
  }
  return out;
}

Actions RegionalAgent::summarize(SimTime) {
  comms::AreaSummary s;
  s.area_id = area_.id;
  for (const auto& dg : area_.dgs) {
    const bool on = db_.dg_status[dg];
    s.dg_status.emplace_back(dg, on);
    if (on) s.p_gen += dg_p_[dg];
  }
  for (const auto& l : loads_)
    if (l.connected) s.p_load += l.p;
  s.v_min = 1.0;
  for (const auto& [who, v] : v_) {
    if (v < s.v_min) {
      s.v_min = v;
      auto it = terminal_bus_.find(who);
      s.v_min_bus = it == terminal_bus_.end() ? std::string() : it->second;
    }
  }
  db_.summaries.push_back(s);

  Actions out;
  out.messages.push_back({comms::Mode::Blackboard, "area:" + area_.id, s, cfg_.bb_priority});
  out.messages.push_back({comms::Mode::Direct, std::string(comms::kCentralId), std::move(s)});
  return out;
}

Actions RegionalAgent::poll_blackboard(const comms::Blackboard& bb, SimTime now) {
  bool changed = false;
  for (const auto& [key, entry] : bb.entries()) {
    if (key.rfind("area:", 0) != 0 || key == "area:" + area_.id) continue;
    const auto* s = std::get_if<comms::AreaSummary>(&entry.value);
    if (!s) continue;
    for (const auto& [dg, on] : s->dg_status) {
      if (std::find(area_.dgs.begin(), area_.dgs.end(), dg) != area_.dgs.end()) continue;
      auto it = db_.dg_status.find(dg);
      if (it != db_.dg_status.end() && it->second != on) {
        it->second = on;
        changed = true;
      }
    }
  }
  return changed ? adapt(now) : Actions{};
}

Actions RegionalAgent::on_order(const comms::Payload& p, SimTime) {
  Actions out;
  std::string target;
  if (const auto* d = std::get_if<comms::DgDispatch>(&p)) {
    target = d->dg_id;
  } else if (const auto* o = std::get_if<comms::LoadShedOrder>(&p)) {
    target = o->executor_id;
    if (owns(target)) {
      for (auto& l : loads_)
        if (l.id == o->load_id) l.connected = false;
    }
  } else if (const auto* i = std::get_if<comms::Instruction>(&p)) {
    target = i->target;
  } else {
    return out;
  }
  if (owns(target)) out.messages.push_back({comms::Mode::Radio, area_.id, p});
  return out;
}

}  // namespace mas::agents
