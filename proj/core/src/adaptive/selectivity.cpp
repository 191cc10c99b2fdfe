#include "mas/adaptive/selectivity.hpp"

#include <cmath>
#include <map>
#include <set>

#include "mas/agents/branch_agent.hpp"
#include "mas/agents/dg_agent.hpp"
#include "mas/agents/event_log.hpp"
#include "mas/error.hpp"
#include "mas/grid/fault_solver.hpp"
#include "mas/grid/measurement.hpp"

namespace mas::adaptive {

namespace {

struct Pending {
  SimTime at;
  std::string agent;
  int timer;
  auto operator<=>(const Pending&) const = default;
};

void replay_case(const grid::Network& net, const Settings& settings, const std::string& faulted, double position,
                 const StudyConfig& cfg, std::vector<Violation>& out) {
  grid::Network plant = net;
  agents::EventLog log;

  agents::BranchAgentConfig bcfg;
  bcfg.cycle = cfg.cycle;
  bcfg.breaker_time = cfg.breaker_time;
  std::map<std::string, agents::BranchAgent> relays;
  for (const auto& br : plant.branches()) {
    if (!br.breaker_closed) continue;
    auto g = settings.at(br.id);
    g.group_id = 1;
    relays.emplace(br.id, agents::BranchAgent(br.id, {{1, g}}, 1, bcfg, &log));
  }
  agents::DgAgentConfig dcfg;
  dcfg.uv_threshold = cfg.dg_uv_threshold;
  dcfg.uv_time = cfg.dg_uv_time;
  std::map<std::string, agents::DgAgent> dgs;
  for (const auto& src : plant.sources())
    if (src.is_dg() && src.online) dgs.emplace(src.id, agents::DgAgent(src, dcfg, &log));

  const grid::FaultSpec fault{faulted, position, {}, false};
  grid::SolverOptions opts;
  opts.allow_dead_fault = true;

  std::set<Pending> timers;
  auto absorb = [&](const std::string& agent, agents::Actions&& a, bool& dirty, bool& cleared) {
    for (const auto& t : a.timers) timers.insert({t.at, agent, t.timer});
    for (const auto& p : a.plant) {
      using K = agents::PlantAction::Kind;
      if (p.kind == K::BreakerOpen) {
        plant.branch(p.element).breaker_closed = false;
        if (p.element == faulted) cleared = true;
        dirty = true;
      } else if (p.kind == K::DgOffline) {
        plant.source(p.element).online = false;
        dirty = true;
      }
    }
  };

  bool dirty = true;
  bool cleared = false;
  grid::FaultSolution sol;
  std::set<std::string> wrong;

  for (SimTime now{}; now <= cfg.window && !cleared; now += cfg.cycle) {
    while (!timers.empty() && timers.begin()->at <= now) {
      const Pending p = *timers.begin();
      timers.erase(timers.begin());
      auto it = relays.find(p.agent);
      if (it != relays.end()) absorb(p.agent, it->second.on_timer(p.timer, p.at), dirty, cleared);
    }
    if (cleared) break;
    if (dirty) {
      sol = plant.branch(faulted).breaker_closed ? grid::solve_fault(plant, fault, opts)
                                                 : grid::solve_network(plant, opts);
      dirty = false;
    }
    for (auto& [id, relay] : relays) {
      relay.collect(grid::branch_measurement(plant, sol, id, grid::End::From, now));
      relay.preprocess();
      absorb(id, relay.protection_step(now), dirty, cleared);
    }
    for (auto& [id, dg] : dgs) {
      if (!plant.find_source(id)->online) continue;
      const grid::Source& src = *plant.find_source(id);
      auto v = sol.bus_v.find(src.bus);
      const double mag = v == sol.bus_v.end() ? 0.0 : std::abs(v->second);
      absorb(id, dg.dg_protect(mag, now), dirty, cleared);
    }
  }
  for (const auto& r : log.records())
    if (r.kind == agents::EventKind::Trip && r.agent != faulted) wrong.insert(r.agent);

  if (!cleared) out.push_back({faulted, position, "uncleared"});
  for (const auto& w : wrong) out.push_back({faulted, position, w});
}

}  // namespace

std::vector<Violation> verify_selectivity(const grid::Network& base, const DgStatusVector& v, const Settings& settings,
                                          const StudyConfig& cfg) {
  const grid::Network net = apply_vector(base, v);
  std::vector<Violation> out;
  for (const auto& br : net.branches())
    if (br.breaker_closed && !settings.count(br.id)) out.push_back({br.id, 0.0, "uncovered"});
  if (!out.empty()) return out;

  for (const auto& br : net.branches()) {
    if (!br.breaker_closed) continue;
    for (double pos : cfg.positions) {
      try {
        replay_case(net, settings, br.id, pos, cfg, out);
      } catch (const Error&) {
        out.push_back({br.id, pos, "uncleared"});
      }
    }
  }
  return out;
}

}  // namespace mas::adaptive
