#include "mas/adaptive/settings.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "mas/error.hpp"
#include "mas/grid/fault_solver.hpp"

namespace mas::adaptive {

namespace {

constexpr int kGradingSamples = 200;

SettingsResult fail(std::string reason, std::string detail) {
  SettingsResult r;
  r.reason = std::move(reason);
  r.detail = std::move(detail);
  return r;
}

}  // namespace

double operating_time(const agents::SettingGroup& g, double i) {
  double t = std::numeric_limits<double>::infinity();
  if (i > g.stage1_pickup) t = std::min(t, g.stage1_delay);
  if (i > g.stage2_pickup) t = std::min(t, g.stage2_delay);
  if (i > g.stage3_pickup) t = std::min(t, agents::inverse_time(g.stage3_tms, i / g.stage3_pickup));
  return t;
}

SettingsResult compute_settings(const grid::Network& base, const DgStatusVector& v, const StudyConfig& cfg) {
  grid::Network net;
  try {
    net = apply_vector(base, v);
  } catch (const ConfigError& e) {
    return fail("topology", e.what());
  }

  const grid::Topology topo(net);
  if (!topo.is_radial()) return fail("topology", "closed branches form a loop");

  const std::string& root = net.grid_supply().bus;
  std::vector<const grid::Branch*> closed;
  std::map<std::string, std::set<std::string>> to_side;
  for (const auto& br : net.branches()) {
    if (!br.breaker_closed) continue;
    auto buses = topo.to_side_buses(br.id);
    std::set<std::string> side(buses.begin(), buses.end());
    if (side.count(root)) return fail("topology", fmt::format("{} points toward the supply", br.id));
    closed.push_back(&br);
    to_side[br.id] = std::move(side);
  }

  grid::SolverOptions opts;
  opts.allow_dead_fault = true;

  SettingsResult out;
  std::size_t remaining = closed.size();
  while (remaining > 0) {
    std::size_t settled_now = 0;
    for (const grid::Branch* br : closed) {
      if (out.groups.count(br->id)) continue;
      const auto down = topo.downstream_branches(br->id);
      if (!std::all_of(down.begin(), down.end(), [&](const auto& d) { return out.groups.count(d) > 0; })) continue;

      double i_rem = 0.0;
      try {
        const auto s = grid::solve_fault(net, grid::FaultSpec{br->id, 1.0, {}, true}, opts);
        i_rem = std::abs(s.current(br->id, grid::End::From));
      } catch (const Error& e) {
        return fail("topology", fmt::format("{}: {}", br->id, e.what()));
      }

      agents::SettingGroup g;
      g.stage1_pickup = cfg.k_rel * i_rem;
      if (down.empty()) {
        g.stage2_pickup = cfg.k_coord * i_rem;
        g.stage2_delay = cfg.grading;
      } else {
        double s1 = 0.0;
        double d2 = 0.0;
        for (const auto& d : down) {
          s1 = std::max(s1, out.groups.at(d).stage1_pickup);
          d2 = std::max(d2, out.groups.at(d).stage2_delay);
        }
        g.stage2_pickup = cfg.k_coord * s1;
        g.stage2_delay = std::round((d2 + cfg.grading) * 1000.0) / 1000.0;
      }

      // Largest current the branch carries without a fault: all to-side
      // loads against online DG output, or the DGs exporting alone.
      const auto& side = to_side.at(br->id);
      grid::Complex s_load{};
      grid::Complex s_dg{};
      for (const auto& ld : net.loads())
        if (ld.connected && side.count(ld.bus)) s_load += grid::Complex{ld.p, ld.q};
      bool dg_below = false;
      for (const auto& src : net.sources()) {
        if (!src.is_dg() || !src.online || !side.count(src.bus)) continue;
        dg_below = true;
        s_dg += grid::Complex{src.p_out, src.q_out};
      }
      const double i_load = std::max(std::abs(s_load - s_dg), std::abs(s_dg));
      g.stage3_pickup = std::max(cfg.pickup_floor, cfg.load_factor * i_load);
      g.directional = dg_below;
      g.reclose_enabled = true;
      g.dead_time = cfg.dead_time;

      if (i_rem < cfg.k_sens * g.stage3_pickup) {
        return fail("sensitivity", fmt::format("{}: remote fault {:.4f} pu below {} x stage-3 pickup {:.4f} pu",
                                               br->id, i_rem, cfg.k_sens, g.stage3_pickup));
      }
      if (!(g.stage1_pickup > g.stage2_pickup && g.stage2_pickup > g.stage3_pickup)) {
        return fail("ordering", fmt::format("{}: pickups {:.4f} / {:.4f} / {:.4f} not descending", br->id,
                                            g.stage1_pickup, g.stage2_pickup, g.stage3_pickup));
      }

      double tms = cfg.tms_min;
      for (const auto& d : down) {
        const auto& gd = out.groups.at(d);
        for (int k = 1; k <= kGradingSamples; ++k) {
          const double i = g.stage3_pickup + (g.stage2_pickup - g.stage3_pickup) * k / kGradingSamples;
          const double t_down = operating_time(gd, i);
          if (!std::isfinite(t_down)) continue;
          const double unit = agents::inverse_time(1.0, i / g.stage3_pickup);
          tms = std::max(tms, (t_down + cfg.grading) / unit);
        }
      }
      tms = std::ceil(tms * 1000.0 - 1e-9) / 1000.0;
      if (tms > cfg.tms_max) {
        return fail("grading", fmt::format("{}: time multiplier {:.3f} exceeds {}", br->id, tms, cfg.tms_max));
      }
      g.stage3_tms = tms;

      if (auto why = g.check(); !why.empty()) return fail("ordering", fmt::format("{}: {}", br->id, why));
      out.groups.emplace(br->id, g);
      ++settled_now;
    }
    if (settled_now == 0) return fail("topology", "branch ordering did not converge");
    remaining -= settled_now;
  }
  return out;
}

}  // namespace mas::adaptive
