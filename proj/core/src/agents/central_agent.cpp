#include "mas/agents/central_agent.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>
#include <tuple>

#include "mas/comms/layout.hpp"

namespace mas::agents {

namespace {
constexpr double kTol = 1e-9;
}

double modeled_frequency(double p_load, double p_gen, const CentralConfig& cfg) {
  return cfg.f0 - (p_load - p_gen) / cfg.k_f;
}

CentralAgent::CentralAgent(const grid::Network& net, CentralConfig cfg, EventLog* log)
    : cfg_(cfg), log_(log), grid_p_(net.grid_supply().p_out) {
  for (const auto& s : net.sources()) {
    if (!s.is_dg()) continue;
    dgs_.push_back({s.id, s.bus, s.kind, s.online, s.p_out, s.q_out, s.p_max, s.q_max});
  }
  std::sort(dgs_.begin(), dgs_.end(), [](const Dg& a, const Dg& b) { return a.id < b.id; });

  for (const auto& l : net.loads()) {
    LoadEntry e{l.id, l.bus, l.p, l.shed_priority, l.connected, {}};
    for (const auto& br : net.branches()) {
      if (br.to_bus == l.bus) {
        e.executor = br.id;
        break;
      }
    }
    if (e.executor.empty()) {
      for (const auto& br : net.branches()) {
        if (br.from_bus == l.bus) {
          e.executor = br.id;
          break;
        }
      }
    }
    loads_.push_back(std::move(e));
  }
  std::sort(loads_.begin(), loads_.end(), [](const LoadEntry& a, const LoadEntry& b) {
    return std::tie(a.priority, a.id) < std::tie(b.priority, b.id);
  });

  const grid::Topology topo(net);
  for (const auto& bus : net.buses()) {
    for (const auto& dg : dgs_) {
      if (auto h = topo.hop_distance(bus.id, dg.bus)) hops_[bus.id][dg.bus] = *h;
    }
  }
  db_.frequency = frequency();
}

void CentralAgent::log(SimTime t, EventKind kind, Detail detail) {
  if (log_) log_->append(t, std::string(comms::kCentralId), kind, std::move(detail));
}

double CentralAgent::p_gen() const {
  double p = grid_p_;
  for (const auto& dg : dgs_)
    if (dg.online) p += dg.p;
  return p;
}

double CentralAgent::p_load() const {
  double p = 0.0;
  for (const auto& l : loads_) {
    if (l.connected && std::find(db_.shed_log.begin(), db_.shed_log.end(), l.id) == db_.shed_log.end()) p += l.p;
  }
  return p;
}

const std::string& CentralAgent::executor(const std::string& load_id) const {
  static const std::string none;
  for (const auto& l : loads_)
    if (l.id == load_id) return l.executor;
  return none;
}

Outgoing CentralAgent::dispatch(Dg& dg, double p, double q) {
  dg.p = p;
  dg.q = q;
  db_.dispatch[dg.id] = {p, q};
  return {comms::Mode::Radio, std::string(comms::kCoreGroup), comms::DgDispatch{dg.id, p, q}};
}

Actions CentralAgent::on_summary(const comms::AreaSummary& s, SimTime now) {
  for (const auto& [id, on] : s.dg_status) {
    for (auto& dg : dgs_)
      if (dg.id == id) dg.online = on;
  }
  if (!s.v_min_bus.empty()) db_.bus_v_estimates[s.v_min_bus] = s.v_min;
  low_v_ = s.v_min;
  low_v_bus_ = s.v_min_bus;
  return central_supervise(now);
}

Actions CentralAgent::central_supervise(SimTime now) {
  Actions out;
  db_.frequency = frequency();
  if (db_.frequency < cfg_.f_min - kTol) {
    for (auto& dg : dgs_) {
      if (frequency() >= cfg_.f_min - kTol) break;
      if (!dg.online || !grid::is_dispatchable(dg.kind) || dg.p >= dg.p_max) continue;
      out.messages.push_back(dispatch(dg, dg.p_max, dg.q));
    }
    for (const auto& l : loads_) {
      if (frequency() >= cfg_.f_min - kTol) break;
      if (!l.connected || l.executor.empty()) continue;
      if (std::find(db_.shed_log.begin(), db_.shed_log.end(), l.id) != db_.shed_log.end()) continue;
      db_.shed_log.push_back(l.id);
      out.messages.push_back(
          {comms::Mode::Radio, std::string(comms::kCoreGroup), comms::LoadShedOrder{l.id, l.executor}});
      log(now, EventKind::Shed,
          {{"load", l.id}, {"priority", std::to_string(l.priority)}, {"f", analog(frequency())}});
    }
    db_.frequency = frequency();
    if (db_.frequency < cfg_.f_min - kTol) {
      log(now, EventKind::Alarm, {{"reason", "frequency"}, {"f", analog(db_.frequency)}});
    }
  }

  if (low_v_ < cfg_.v_min && !low_v_bus_.empty()) {
    Dg* best = nullptr;
    std::size_t best_hops = std::numeric_limits<std::size_t>::max();
    for (auto& dg : dgs_) {
      if (!dg.online || dg.q >= dg.q_max - kTol) continue;
      const auto& row = hops_[low_v_bus_];
      auto it = row.find(dg.bus);
      const std::size_t h = it == row.end() ? std::numeric_limits<std::size_t>::max() : it->second;
      if (!best || h < best_hops) {
        best = &dg;
        best_hops = h;
      }
    }
    if (best) {
      out.messages.push_back(dispatch(*best, best->p, std::min(best->q + cfg_.q_step, best->q_max)));
    } else {
      log(now, EventKind::Alarm, {{"reason", "voltage"}, {"bus", low_v_bus_}, {"v", analog(low_v_)}});
    }
    low_v_ = 1.0;
  }
  return out;
}

}  // namespace mas::agents
