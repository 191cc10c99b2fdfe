#include "mas/agents/event_log.hpp"

#include <fmt/format.h>

#include <array>
#include <stdexcept>

#include "mas/agents/actions.hpp"

namespace mas::agents {

namespace {
constexpr std::array<std::pair<EventKind, std::string_view>, 14> kNames{{
    {EventKind::Trip, "TRIP"},
    {EventKind::Close, "CLOSE"},
    {EventKind::Open, "OPEN"},
    {EventKind::Reclose, "RECLOSE"},
    {EventKind::Lockout, "LOCKOUT"},
    {EventKind::DgOff, "DG_OFF"},
    {EventKind::DgOn, "DG_ON"},
    {EventKind::DgDispatch, "DG_DISPATCH"},
    {EventKind::Shed, "SHED"},
    {EventKind::GroupChange, "GROUP_CHANGE"},
    {EventKind::Alarm, "ALARM"},
    {EventKind::Fault, "FAULT"},
    {EventKind::Clear, "CLEAR"},
    {EventKind::Load, "LOAD"},
}};
}  // namespace

std::string_view to_string(EventKind k) {
  for (const auto& [kind, name] : kNames)
    if (kind == k) return name;
  return "?";
}

bool parse_event_kind(std::string_view s, EventKind& out) {
  for (const auto& [kind, name] : kNames) {
    if (name == s) {
      out = kind;
      return true;
    }
  }
  return false;
}

std::string EventRecord::get(std::string_view key) const {
  for (const auto& [k, v] : detail)
    if (k == key) return v;
  return {};
}

std::string format_event(const EventRecord& r) {
  std::string out = fmt::format("t={} agent={} event={} detail=", format_seconds(r.t), r.agent, to_string(r.kind));
  for (std::size_t i = 0; i < r.detail.size(); ++i) {
    if (i) out += ' ';
    out += r.detail[i].first;
    out += '=';
    out += r.detail[i].second;
  }
  return out;
}

void EventLog::append(EventRecord r) {
  if (!records_.empty() && r.t < records_.back().t) {
    throw std::logic_error(fmt::format("event log went back in time at {}", format_seconds(r.t)));
  }
  records_.push_back(std::move(r));
}

void EventLog::append(SimTime t, std::string agent, EventKind kind, Detail detail) {
  append(EventRecord{t, std::move(agent), kind, std::move(detail)});
}

std::string analog(double v) {
  std::string s = fmt::format("{:.4f}", v);
  if (s == "-0.0000") s = "0.0000";
  return s;
}

void Actions::append(Actions&& o) {
  for (auto& m : o.messages) messages.push_back(std::move(m));
  for (auto& t : o.timers) timers.push_back(t);
  for (auto& p : o.plant) plant.push_back(std::move(p));
}

}  // namespace mas::agents
