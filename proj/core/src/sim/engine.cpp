#include "mas/sim/engine.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "mas/adaptive/settings.hpp"
#include "mas/adaptive/status_vector.hpp"
#include "mas/agents/central_agent.hpp"
#include "mas/agents/dg_agent.hpp"
#include "mas/agents/regional_agent.hpp"
#include "mas/comms/layout.hpp"
#include "mas/error.hpp"
#include "mas/grid/measurement.hpp"

namespace mas::sim {

using agents::Actions;
using agents::Detail;
using agents::EventKind;

namespace {

constexpr std::string_view kSim = "sim";

struct Later {
  bool operator()(const SimEvent& a, const SimEvent& b) const {
    return a.t != b.t ? a.t > b.t : a.seq > b.seq;
  }
};

std::string alarm_reason(const std::exception& e) {
  if (dynamic_cast<const StaleInstruction*>(&e)) return "stale_instruction";
  if (dynamic_cast<const AlreadyInState*>(&e)) return "already_in_state";
  if (dynamic_cast<const NotMember*>(&e)) return "not_member";
  if (dynamic_cast<const ModeViolation*>(&e) || dynamic_cast<const NoLink*>(&e) ||
      dynamic_cast<const SelectivityViolation*>(&e) || dynamic_cast<const UnknownAgent*>(&e) ||
      dynamic_cast<const UnknownArea*>(&e) || dynamic_cast<const NotRegional*>(&e))
    return "send_failed";
  if (dynamic_cast<const SingularNetwork*>(&e) || dynamic_cast<const InvalidFault*>(&e)) return "solver";
  return "error";
}

std::string impedance_text(grid::Complex z) {
  return fmt::format("{}{}j{}", agents::analog(z.real()), z.imag() < 0 ? '-' : '+', agents::analog(std::abs(z.imag())));
}

}  // namespace

struct Simulation::Impl {
  SimConfig cfg;
  grid::Network original;
  grid::Network plant;
  comms::Layout layout;
  std::unique_ptr<comms::Fabric> fabric;
  agents::EventLog log;

  std::map<std::string, agents::BranchAgent> branches;
  std::map<std::string, agents::DgAgent> dgs;
  std::map<std::string, agents::RegionalAgent> regionals;
  std::unique_ptr<agents::CentralAgent> central;

  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue;
  std::uint64_t next_seq = 0;
  std::set<SimTime> delivery_scheduled;
  SimTime now{};

  std::optional<grid::FaultSpec> fault;
  grid::FaultSolution solution;
  bool dirty = true;

  Impl(const grid::Network& net, SettingsSource src, std::vector<SimEvent> events, SimConfig c)
      : cfg(c), original(net), plant(net), layout(comms::derive_layout(net)) {
    fabric = std::make_unique<comms::Fabric>(layout.agents, layout.links, cfg.fabric);
    for (auto& e : events) {
      next_seq = std::max(next_seq, e.seq + 1);
      queue.push(std::move(e));
    }
    build_agents(src);
  }

  void build_agents(const SettingsSource& src) {
    const auto start = adaptive::current_vector(original);
    std::map<std::string, std::map<std::uint16_t, agents::SettingGroup>> groups;
    std::map<std::string, std::uint16_t> active;
    const bool adaptive_mode = src.kb && !src.static_bits;

    if (src.kb) {
      const std::string bits = src.static_bits ? *src.static_bits : start.bits();
      const adaptive::Settings* settings = nullptr;
      try {
        settings = &adaptive::lookup(*src.kb, original, bits);
      } catch (const InfeasibleVector& e) {
        throw ConfigError(e.what());
      }
      for (const auto& [b, g] : *settings) active[b] = g.group_id;
      if (adaptive_mode) {
        for (const auto& [v, entry] : src.kb->entries)
          for (const auto& [b, g] : entry) groups[b][g.group_id] = g;
      } else {
        for (const auto& [b, g] : *settings) groups[b][g.group_id] = g;
      }
    } else {
      const auto v = src.static_bits ? adaptive::vector_from_bits(original, *src.static_bits) : start;
      const auto r = adaptive::compute_settings(original, v);
      if (!r.feasible()) throw ConfigError(fmt::format("no feasible settings for {}: {}", v.bits(), r.detail));
      for (auto [b, g] : r.groups) {
        g.group_id = 1;
        groups[b][1] = g;
        active[b] = 1;
      }
    }

    central = std::make_unique<agents::CentralAgent>(original, cfg.central, &log);

    agents::BranchAgentConfig bcfg;
    bcfg.cycle = cfg.cycle;
    bcfg.breaker_time = cfg.breaker_time;
    for (const auto& br : original.branches()) {
      auto it = groups.find(br.id);
      if (it == groups.end()) continue;
      agents::BranchAgent a(br.id, it->second, active.at(br.id), bcfg, &log);
      std::vector<std::string> peers;
      for (const auto& [x, y] : layout.links.direct) {
        const std::string* other = x == br.id ? &y : y == br.id ? &x : nullptr;
        if (!other) continue;
        const auto* ref = layout.find(*other);
        if (ref && ref->kind == comms::AgentKind::TerminalBranch) peers.push_back(*other);
      }
      a.set_peers(std::move(peers), regional_of(br.id));
      branches.emplace(br.id, std::move(a));
    }

    for (const auto& s : original.sources()) {
      if (!s.is_dg()) continue;
      agents::DgAgent d(s, {}, &log);
      d.set_regional(regional_of(s.id));
      dgs.emplace(s.id, std::move(d));
    }

    std::map<std::string, bool> dg_status;
    std::map<std::string, double> dg_p;
    for (const auto& s : original.sources()) {
      if (!s.is_dg()) continue;
      dg_status[s.id] = s.online;
      dg_p[s.id] = s.p_out;
    }
    std::map<std::string, std::string> terminal_bus;
    for (const auto& br : original.branches()) terminal_bus[br.id] = br.from_bus;
    for (const auto& s : original.sources()) terminal_bus[s.id] = s.bus;

    agents::KbLookup lookup;
    if (adaptive_mode) {
      const adaptive::KnowledgeBase* kb = src.kb;
      const grid::Network* net = &original;
      lookup = [kb, net](const std::string& bits) {
        std::map<std::string, std::uint16_t> out;
        for (const auto& [b, g] : adaptive::lookup(*kb, *net, bits)) out[b] = g.group_id;
        return out;
      };
    }

    for (const auto& area : layout.areas) {
      std::vector<agents::AreaLoad> loads;
      for (const auto& l : original.loads()) {
        const auto& exec = central->executor(l.id);
        if (std::find(area.home_branches.begin(), area.home_branches.end(), exec) != area.home_branches.end())
          loads.push_back({l.id, l.p, l.connected});
      }
      std::map<std::string, std::uint16_t> assignment;
      for (const auto& b : area.home_branches)
        if (active.count(b)) assignment[b] = active.at(b);
      regionals.emplace(area.regional_id, agents::RegionalAgent(area, dg_status, dg_p, lookup, assignment,
                                                                terminal_bus, loads, {}, &log));
    }
  }

  std::string regional_of(const std::string& terminal) const {
    auto it = layout.home_regional.find(terminal);
    return it == layout.home_regional.end() ? std::string() : it->second;
  }

  void alarm(std::string_view agent, const std::exception& e, Detail extra = {}) {
    Detail d{{"reason", alarm_reason(e)}};
    for (auto& kv : extra) d.push_back(std::move(kv));
    log.append(now, std::string(agent), EventKind::Alarm, std::move(d));
  }

  void schedule_deliveries() {
    auto next = fabric->next_arrival();
    if (next && !delivery_scheduled.count(*next)) {
      delivery_scheduled.insert(*next);
      queue.push({*next, next_seq++, MessageDelivery{}});
    }
  }

  void clear_fault(std::string_view cause) {
    if (!fault) return;
    log.append(now, std::string(kSim), EventKind::Clear, {{"branch", fault->branch_id}, {"cause", std::string(cause)}});
    fault.reset();
    dirty = true;
  }

  void apply(const std::string& agent, Actions&& a) {
    for (auto& m : a.messages) {
      try {
        fabric->send(now, agent, m.mode, m.dest, std::move(m.payload), m.priority);
      } catch (const Error& e) {
        alarm(agent, e, {{"dest", m.dest}});
      }
    }
    for (const auto& t : a.timers) queue.push({t.at, next_seq++, TimerExpiry{agent, t.timer}});
    for (const auto& p : a.plant) {
      using K = agents::PlantAction::Kind;
      switch (p.kind) {
        case K::BreakerOpen:
          plant.branch(p.element).breaker_closed = false;
          if (fault && fault->branch_id == p.element && !fault->permanent) clear_fault("breaker");
          break;
        case K::BreakerClose:
          plant.branch(p.element).breaker_closed = true;
          break;
        case K::DgOffline:
          plant.source(p.element).online = false;
          break;
        case K::DgOnline:
          plant.source(p.element).online = true;
          break;
        case K::DgSetpoint:
          plant.source(p.element).p_out = p.p;
          plant.source(p.element).q_out = p.q;
          break;
        case K::LoadDisconnect:
          plant.load(p.element).connected = false;
          break;
      }
      dirty = true;
    }
    schedule_deliveries();
  }

  void resolve() {
    grid::SolverOptions opts;
    opts.allow_dead_fault = true;
    try {
      solution = fault && plant.branch(fault->branch_id).breaker_closed ? grid::solve_fault(plant, *fault, opts)
                                                                        : grid::solve_network(plant, opts);
    } catch (const Error& e) {
      alarm(kSim, e);
    }
    dirty = false;
  }

  void measure() {
    if (dirty) resolve();
    for (auto& [id, a] : branches) {
      try {
        a.collect(grid::branch_measurement(plant, solution, id, grid::End::From, now));
        a.preprocess();
        apply(id, a.protection_step(now));
        apply(id, a.digests(now));
      } catch (const Error& e) {
        alarm(id, e);
      }
    }
    for (auto& [id, d] : dgs) {
      const auto& bus = plant.find_source(id)->bus;
      auto v = solution.bus_v.find(bus);
      apply(id, d.dg_protect(v == solution.bus_v.end() ? 0.0 : std::abs(v->second), now));
    }
    for (auto& [id, r] : regionals) apply(id, r.poll_blackboard(fabric->blackboard(), now));
  }

  void deliver() {
    delivery_scheduled.erase(now);
    for (auto& d : fabric->deliver(now)) {
      try {
        handle(d);
      } catch (const Error& e) {
        alarm(d.receiver, e, {{"from", d.msg.sender}, {"type", std::string(comms::payload_tag(d.msg.payload))}});
      }
    }
    schedule_deliveries();
  }

  void handle(const comms::Delivery& d) {
    const auto& p = d.msg.payload;
    if (auto it = branches.find(d.receiver); it != branches.end()) {
      auto& a = it->second;
      if (const auto* x = std::get_if<comms::StatusDigest>(&p)) {
        a.receive_digest(*x);
      } else if (const auto* x = std::get_if<comms::Instruction>(&p)) {
        apply(d.receiver, a.execute_instruction(*x, d.msg.t_send, now));
      } else if (const auto* x = std::get_if<comms::SettingGroupUpdate>(&p)) {
        if (x->target == d.receiver) a.apply_group(x->group_id, x->vector_code, now);
      } else if (const auto* x = std::get_if<comms::LoadShedOrder>(&p)) {
        apply(d.receiver, a.on_shed(*x, now));
      }
      return;
    }
    if (auto it = dgs.find(d.receiver); it != dgs.end()) {
      if (const auto* x = std::get_if<comms::Instruction>(&p)) {
        apply(d.receiver, it->second.on_instruction(*x, d.msg.t_send, now));
      } else if (const auto* x = std::get_if<comms::DgDispatch>(&p)) {
        apply(d.receiver, it->second.on_dispatch(*x, now));
      }
      return;
    }
    if (auto it = regionals.find(d.receiver); it != regionals.end()) {
      if (const auto* x = std::get_if<comms::StatusDigest>(&p)) {
        apply(d.receiver, it->second.on_digest(d.msg.sender, *x, now));
      } else if (d.msg.sender == comms::kCentralId) {
        apply(d.receiver, it->second.on_order(p, now));
      }
      return;
    }
    if (d.receiver == comms::kCentralId) {
      if (const auto* x = std::get_if<comms::AreaSummary>(&p)) apply(d.receiver, central->on_summary(*x, now));
    }
  }

  void execute(const SimEvent& ev) {
    std::visit(
        [&](const auto& body) {
          using T = std::decay_t<decltype(body)>;
          if constexpr (std::is_same_v<T, FaultApply>) {
            if (fault) clear_fault("superseded");
            fault = body.fault;
            dirty = true;
            log.append(now, std::string(kSim), EventKind::Fault,
                       {{"branch", body.fault.branch_id},
                        {"pos", agents::analog(body.fault.position)},
                        {"zf", impedance_text(body.fault.z_fault)},
                        {"permanent", body.fault.permanent ? "1" : "0"}});
          } else if constexpr (std::is_same_v<T, FaultClear>) {
            if (fault && fault->branch_id == body.branch) clear_fault("scenario");
          } else if constexpr (std::is_same_v<T, DgSet>) {
            auto& d = dgs.at(body.id);
            if (body.online) apply(body.id, d.set_online(*body.online, now, "operator"));
            if (body.p || body.q) apply(body.id, d.set_output(body.p, body.q, now));
          } else if constexpr (std::is_same_v<T, LoadSet>) {
            auto& l = plant.load(body.id);
            if (l.connected != body.connected) {
              l.connected = body.connected;
              dirty = true;
              log.append(now, std::string(kSim), EventKind::Load,
                         {{"load", body.id}, {"state", body.connected ? "on" : "off"}});
            }
          } else if constexpr (std::is_same_v<T, ManualBreaker>) {
            const std::string home = regional_of(body.branch);
            auto it = regionals.find(home);
            if (it == regionals.end()) return;
            const comms::Instruction instr{body.branch, body.open ? comms::Action::Open : comms::Action::Close};
            apply(home, it->second.on_order(instr, now));
          } else if constexpr (std::is_same_v<T, MeasureCycle>) {
            measure();
          } else if constexpr (std::is_same_v<T, MessageDelivery>) {
            deliver();
          } else if constexpr (std::is_same_v<T, TimerExpiry>) {
            if (auto it = branches.find(body.agent); it != branches.end()) {
              try {
                apply(body.agent, it->second.on_timer(body.timer, now));
              } catch (const Error& e) {
                alarm(body.agent, e);
              }
            }
          }
        },
        ev.body);
  }

  bool step() {
    if (queue.empty() || queue.top().t >= cfg.horizon) return false;
    const SimEvent ev = queue.top();
    queue.pop();
    now = ev.t;
    execute(ev);
    return true;
  }

  RunResult finish() {
    RunResult r;
    r.log.network_hash = original.fingerprint();
    for (const auto& a : layout.agents) r.log.agents[a.id] = a.kind;
    r.log.events = log.records();
    r.log.messages = fabric->records();
    r.metrics = compute_metrics(r.log.events, r.log.messages, r.log.agents);
    r.final_state.plant = plant;
    for (const auto& [id, a] : branches) {
      r.final_state.breakers[id] = a.db().breaker;
      r.final_state.active_groups[id] = a.db().active_group;
    }
    for (const auto& [id, d] : dgs) r.final_state.dg_online[id] = d.db().online;
    r.final_state.frequency = central->frequency();
    return r;
  }
};

Simulation::Simulation(const grid::Network& net, SettingsSource settings, std::vector<SimEvent> events, SimConfig cfg)
    : impl_(std::make_unique<Impl>(net, settings, std::move(events), cfg)) {}

Simulation::~Simulation() = default;

bool Simulation::step() { return impl_->step(); }
SimTime Simulation::now() const { return impl_->now; }
RunResult Simulation::finish() { return impl_->finish(); }

RunResult run(const grid::Network& net, SettingsSource settings, std::vector<SimEvent> events, const SimConfig& cfg) {
  Simulation sim(net, settings, std::move(events), cfg);
  while (sim.step()) {
  }
  return sim.finish();
}

}  // namespace mas::sim
