#include "mas/comms/fabric.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "mas/error.hpp"

namespace mas::comms {

std::string format_record(const MessageRecord& r) {
  return fmt::format("t={} seq={} mode={} from={} to={} type={} bytes={}", format_seconds(r.t), r.seq,
                     to_string(r.mode), r.from, r.to, r.type, r.bytes);
}

Fabric::Fabric(std::vector<AgentRef> agents, LinkTable links, FabricConfig cfg)
    : links_(std::move(links)), cfg_(cfg), rng_(cfg.jitter_seed) {
  int centrals = 0;
  for (auto& a : agents) {
    if (a.kind == AgentKind::Central) ++centrals;
    if (is_terminal(a.kind) && a.area_ids.empty()) {
      throw ConfigError(fmt::format("terminal agent '{}' belongs to no area", a.id));
    }
    const std::string id = a.id;
    if (!agents_.emplace(id, std::move(a)).second) throw ConfigError(fmt::format("duplicate agent '{}'", id));
  }
  if (centrals != 1) throw ConfigError(fmt::format("expected exactly one central agent, found {}", centrals));
}

const AgentRef* Fabric::agent(std::string_view id) const {
  auto it = agents_.find(id);
  return it == agents_.end() ? nullptr : &it->second;
}

SimTime Fabric::latency(LinkClass c) {
  SimTime base;
  switch (c) {
    case LinkClass::TerminalTerminal: base = cfg_.latency_tt; break;
    case LinkClass::TerminalRegional:
    case LinkClass::RegionalTerminal: base = cfg_.latency_tr; break;
    case LinkClass::RegionalRegional: base = cfg_.latency_rr; break;
    case LinkClass::RegionalCentral:
    case LinkClass::CentralRegional: base = cfg_.latency_rc; break;
  }
  if (cfg_.jitter) base += SimTime::from_us(std::uniform_int_distribution<std::int64_t>(0, 1000)(rng_));
  return base;
}

std::uint64_t Fabric::send(SimTime now, std::string_view sender, Mode mode, std::string_view dest, Payload payload,
                           std::uint8_t priority) {
  const AgentRef* from = agent(sender);
  if (!from) throw UnknownAgent(fmt::format("unknown sender '{}'", sender));

  Message msg;
  msg.t_send = now;
  msg.sender = from->id;
  msg.mode = mode;
  msg.dest = std::string(dest);
  msg.priority = priority;
  msg.size_bytes = encode_payload(payload);
  std::vector<std::string> receivers;

  switch (mode) {
    case Mode::Direct: {
      const AgentRef* to = agent(dest);
      if (!to) throw UnknownAgent(fmt::format("unknown receiver '{}'", dest));
      const Mode rule = mode_allowed(from->kind, to->kind);
      if (rule != Mode::Direct) {
        throw ModeViolation(fmt::format("{} -> {} must use {}, not DIRECT", from->id, to->id, to_string(rule)));
      }
      if (!links_.linked(from->id, to->id)) throw NoLink(fmt::format("no direct link {} -> {}", from->id, to->id));
      if (is_terminal(from->kind) && is_terminal(to->kind)) {
        if (const auto* d = std::get_if<StatusDigest>(&payload); d && (d->v_mag || d->switch_count)) {
          throw SelectivityViolation(
              fmt::format("{} -> {}: voltage and switch count stay off terminal links", from->id, to->id));
        }
      }
      msg.link = link_class(from->kind, to->kind);
      receivers.push_back(to->id);
      break;
    }
    case Mode::Radio: {
      auto g = links_.groups.find(dest);
      if (g == links_.groups.end()) throw UnknownArea(fmt::format("unknown group '{}'", dest));
      const auto& members = g->second;
      if (std::find(members.begin(), members.end(), from->id) == members.end()) {
        throw ModeViolation(fmt::format("{} is not in group {}", from->id, dest));
      }
      std::optional<LinkClass> cls;
      for (const auto& m : members) {
        if (m == from->id) continue;
        const AgentRef* to = agent(m);
        if (!to) throw UnknownAgent(fmt::format("unknown group member '{}'", m));
        const Mode rule = mode_allowed(from->kind, to->kind);
        if (rule != Mode::Radio) {
          throw ModeViolation(fmt::format("{} -> {} must use {}, not RADIO", from->id, to->id, to_string(rule)));
        }
        cls = link_class(from->kind, to->kind);
        receivers.push_back(m);
      }
      if (!cls) throw ModeViolation(fmt::format("group {} has no receivers", dest));
      msg.link = *cls;
      break;
    }
    case Mode::Blackboard: {
      if (from->kind != AgentKind::Regional) {
        throw NotRegional(fmt::format("agent '{}' may not write the blackboard", from->id));
      }
      msg.link = LinkClass::RegionalRegional;
      receivers.emplace_back();
      break;
    }
    case Mode::Forbidden:
      throw ModeViolation("FORBIDDEN is not a transmission mode");
  }

  msg.seq = next_seq_++;
  msg.payload = std::move(payload);
  const SimTime arrival = now + latency(msg.link);
  for (const auto& r : receivers) queue_.insert({arrival, msg.seq, r});
  remaining_[msg.seq] = static_cast<int>(receivers.size());
  records_.push_back({now, msg.seq, mode, from->id, msg.dest, payload_tag(msg.payload), msg.size_bytes});
  in_flight_.emplace(msg.seq, std::move(msg));
  return records_.back().seq;
}

std::optional<SimTime> Fabric::next_arrival() const {
  if (queue_.empty()) return std::nullopt;
  return queue_.begin()->arrival;
}

std::vector<Delivery> Fabric::deliver(SimTime now) {
  std::vector<Delivery> out;
  while (!queue_.empty() && queue_.begin()->arrival <= now) {
    const Pending p = *queue_.begin();
    queue_.erase(queue_.begin());
    auto it = in_flight_.find(p.seq);
    const Message& msg = it->second;
    if (p.receiver.empty()) {
      const AgentRef* w = agent(msg.sender);
      blackboard_.post(msg.dest, msg.payload, msg.priority, msg.sender, w->kind, msg.t_send);
    } else {
      out.push_back({p.arrival, p.receiver, msg});
    }
    if (--remaining_[p.seq] == 0) {
      remaining_.erase(p.seq);
      in_flight_.erase(it);
    }
  }
  return out;
}

}  // namespace mas::comms
