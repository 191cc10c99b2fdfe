#include "mas/sim/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace mas::sim {

using agents::EventKind;

bool Metrics::all_selective() const {
  return std::all_of(faults.begin(), faults.end(), [](const FaultVerdict& f) { return f.selective; });
}

std::optional<comms::LinkClass> classify(const comms::MessageRecord& r, const AgentDirectory& agents) {
  auto from = agents.find(r.from);
  if (from == agents.end()) return std::nullopt;
  switch (r.mode) {
    case comms::Mode::Blackboard:
      return comms::LinkClass::RegionalRegional;
    case comms::Mode::Radio:
      if (from->second == comms::AgentKind::Central) return comms::LinkClass::CentralRegional;
      if (from->second == comms::AgentKind::Regional) return comms::LinkClass::RegionalTerminal;
      return std::nullopt;
    case comms::Mode::Direct: {
      auto to = agents.find(r.to);
      if (to == agents.end()) return std::nullopt;
      return comms::link_class(from->second, to->second);
    }
    default:
      return std::nullopt;
  }
}

Metrics compute_metrics(const std::vector<agents::EventRecord>& events,
                        const std::vector<comms::MessageRecord>& messages, const AgentDirectory& agents) {
  Metrics m;
  for (const auto& [id, kind] : agents)
    if (kind == comms::AgentKind::TerminalBranch) m.trips[id] = 0;
  for (auto mode : {comms::Mode::Direct, comms::Mode::Radio, comms::Mode::Blackboard})
    m.per_mode[std::string(comms::to_string(mode))] = {};
  for (auto c : {comms::LinkClass::TerminalTerminal, comms::LinkClass::TerminalRegional,
                 comms::LinkClass::RegionalTerminal, comms::LinkClass::RegionalRegional,
                 comms::LinkClass::RegionalCentral, comms::LinkClass::CentralRegional})
    m.per_link[std::string(comms::to_string(c))] = {};

  for (const auto& r : messages) {
    auto& mode = m.per_mode[std::string(comms::to_string(r.mode))];
    ++mode.messages;
    mode.bytes += r.bytes;
    if (auto c = classify(r, agents)) {
      auto& link = m.per_link[std::string(comms::to_string(*c))];
      ++link.messages;
      link.bytes += r.bytes;
    }
  }

  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& r = events[i];
    switch (r.kind) {
      case EventKind::Trip:
        ++m.trips[r.agent];
        break;
      case EventKind::Shed:
        m.loads_shed.push_back(r.get("load"));
        break;
      case EventKind::DgOff:
        ++m.dg_disconnects;
        break;
      case EventKind::GroupChange:
        ++m.group_changes;
        break;
      default:
        break;
    }
    if (r.kind != EventKind::Fault) continue;

    // The fault lives until its branch is cleared or the next fault starts.
    FaultVerdict v;
    v.branch = r.get("branch");
    v.applied = r.t;
    std::size_t end = events.size();
    for (std::size_t k = i + 1; k < events.size(); ++k) {
      const auto& e = events[k];
      if (e.kind == EventKind::Fault || (e.kind == EventKind::Clear && e.get("branch") == v.branch)) {
        end = k;
        break;
      }
    }
    std::optional<std::size_t> last_open;
    for (std::size_t k = i + 1; k < end; ++k) {
      const auto& e = events[k];
      if (e.kind == EventKind::Open && e.agent == v.branch && e.get("cause") == "trip") {
        last_open = k;
        v.clearing_s = (e.t - v.applied).seconds();
      }
    }
    const std::size_t horizon = last_open ? *last_open : end;
    bool own_trip = false;
    for (std::size_t k = i + 1; k < horizon; ++k) {
      const auto& e = events[k];
      if (e.kind != EventKind::Trip) continue;
      if (e.agent == v.branch) {
        own_trip = true;
      } else if (std::find(v.wrong_trips.begin(), v.wrong_trips.end(), e.agent) == v.wrong_trips.end()) {
        v.wrong_trips.push_back(e.agent);
      }
    }
    const bool removed_externally = end < events.size() && events[end].kind == EventKind::Clear &&
                                    events[end].get("cause") == "scenario";
    if (last_open) {
      v.selective = own_trip && v.wrong_trips.empty();
    } else {
      v.selective = removed_externally && !own_trip && v.wrong_trips.empty();
    }
    m.faults.push_back(std::move(v));
  }
  return m;
}

std::string Metrics::to_table() const {
  std::map<std::string, std::string> kv;
  int total = 0;
  for (const auto& [b, n] : trips) {
    kv["trips." + b] = std::to_string(n);
    total += n;
  }
  kv["trips.total"] = std::to_string(total);
  for (const auto& [mode, t] : per_mode) {
    kv["messages." + mode] = std::to_string(t.messages);
    kv["bytes." + mode] = std::to_string(t.bytes);
  }
  for (const auto& [link, t] : per_link) {
    kv["messages.link." + link] = std::to_string(t.messages);
    kv["bytes.link." + link] = std::to_string(t.bytes);
  }
  kv["faults"] = std::to_string(faults.size());
  for (std::size_t i = 0; i < faults.size(); ++i) {
    const auto& f = faults[i];
    const std::string p = fmt::format("fault.{:03}.", i + 1);
    kv[p + "branch"] = f.branch;
    kv[p + "t"] = format_seconds(f.applied);
    kv[p + "clearing_s"] = f.clearing_s ? fmt::format("{:.6f}", *f.clearing_s) : "-";
    kv[p + "selective"] = f.selective ? "pass" : "fail";
    std::string wrong;
    for (const auto& w : f.wrong_trips) wrong += (wrong.empty() ? "" : ",") + w;
    kv[p + "wrong_trips"] = wrong.empty() ? "-" : wrong;
  }
  kv["selectivity"] = faults.empty() ? "none" : all_selective() ? "pass" : "fail";
  kv["loads_shed"] = std::to_string(loads_shed.size());
  std::string shed;
  for (const auto& l : loads_shed) shed += (shed.empty() ? "" : ",") + l;
  kv["loads_shed.ids"] = shed.empty() ? "-" : shed;
  kv["dg_disconnects"] = std::to_string(dg_disconnects);
  kv["group_changes"] = std::to_string(group_changes);

  std::string out;
  for (const auto& [k, v] : kv) out += fmt::format("{}\t{}\n", k, v);
  return out;
}

}  // namespace mas::sim
