#include "mas/comms/layout.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <deque>

#include "mas/error.hpp"

namespace mas::comms {

void LinkTable::link(const std::string& a, const std::string& b) {
  direct.insert(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
}

bool LinkTable::linked(std::string_view a, std::string_view b) const {
  std::pair<std::string, std::string> key = a < b ? std::make_pair(std::string(a), std::string(b))
                                                  : std::make_pair(std::string(b), std::string(a));
  return direct.count(key) > 0;
}

std::vector<std::string> Area::terminals() const {
  std::vector<std::string> out = home_branches;
  out.insert(out.end(), overlap_branches.begin(), overlap_branches.end());
  out.insert(out.end(), dgs.begin(), dgs.end());
  return out;
}

const AgentRef* Layout::find(std::string_view id) const {
  for (const auto& a : agents)
    if (a.id == id) return &a;
  return nullptr;
}

const Area* Layout::area(std::string_view id) const {
  for (const auto& a : areas)
    if (a.id == id) return &a;
  return nullptr;
}

const Area* Layout::area_of_regional(std::string_view regional_id) const {
  for (const auto& a : areas)
    if (a.regional_id == regional_id) return &a;
  return nullptr;
}

Layout derive_layout(const grid::Network& net) {
  const auto& branches = net.branches();
  const std::string& root = net.grid_supply().bus;

  // Flood each feeder from its head branch without crossing the supply bus.
  std::map<std::string, std::vector<std::size_t>, std::less<>> incident;
  for (std::size_t i = 0; i < branches.size(); ++i) {
    incident[branches[i].from_bus].push_back(i);
    incident[branches[i].to_bus].push_back(i);
  }
  std::vector<int> area_of(branches.size(), -1);
  std::vector<std::vector<std::size_t>> groups;
  auto flood = [&](std::size_t head) {
    const int a = static_cast<int>(groups.size());
    groups.emplace_back();
    std::deque<std::size_t> todo{head};
    area_of[head] = a;
    while (!todo.empty()) {
      const std::size_t b = todo.front();
      todo.pop_front();
      groups[static_cast<std::size_t>(a)].push_back(b);
      for (const std::string* bus : {&branches[b].from_bus, &branches[b].to_bus}) {
        if (*bus == root) continue;
        for (std::size_t nb : incident[*bus]) {
          if (area_of[nb] != -1) continue;
          area_of[nb] = a;
          todo.push_back(nb);
        }
      }
    }
  };
  for (std::size_t i = 0; i < branches.size(); ++i) {
    if (area_of[i] == -1 && (branches[i].from_bus == root || branches[i].to_bus == root)) flood(i);
  }
  for (std::size_t i = 0; i < branches.size(); ++i) {
    if (area_of[i] == -1) flood(i);
  }

  Layout out;
  for (std::size_t a = 0; a < groups.size(); ++a) {
    Area area;
    area.id = fmt::format("A{}", a + 1);
    area.regional_id = fmt::format("R{}", a + 1);
    std::sort(groups[a].begin(), groups[a].end());
    for (std::size_t b : groups[a]) area.home_branches.push_back(branches[b].id);
    std::set<std::size_t> overlap;
    for (std::size_t b : groups[a]) {
      for (const std::string* bus : {&branches[b].from_bus, &branches[b].to_bus}) {
        for (std::size_t nb : incident[*bus])
          if (area_of[nb] != static_cast<int>(a)) overlap.insert(nb);
      }
    }
    for (std::size_t b : overlap) area.overlap_branches.push_back(branches[b].id);
    out.areas.push_back(std::move(area));
  }

  // A DG belongs to the first area whose own branches touch its bus.
  for (const auto& s : net.sources()) {
    if (!s.is_dg()) continue;
    int home = -1;
    for (std::size_t a = 0; a < groups.size() && home == -1; ++a) {
      for (std::size_t b : groups[a]) {
        if (branches[b].from_bus == s.bus || branches[b].to_bus == s.bus) {
          home = static_cast<int>(a);
          break;
        }
      }
    }
    if (home == -1) throw ConfigError(fmt::format("DG '{}' is not attached to any branch", s.id));
    out.areas[static_cast<std::size_t>(home)].dgs.push_back(s.id);
  }
  for (auto& area : out.areas) std::sort(area.dgs.begin(), area.dgs.end());

  // Agents.
  std::map<std::string, std::vector<std::string>> memberships;
  for (const auto& area : out.areas)
    for (const auto& t : area.terminals()) memberships[t].push_back(area.id);
  for (const auto& br : branches) out.agents.push_back({br.id, AgentKind::TerminalBranch, memberships[br.id]});
  for (const auto& s : net.sources())
    if (s.is_dg()) out.agents.push_back({s.id, AgentKind::TerminalDg, memberships[s.id]});
  for (const auto& area : out.areas) out.agents.push_back({area.regional_id, AgentKind::Regional, {area.id}});
  out.agents.push_back({std::string(kCentralId), AgentKind::Central, {}});

  std::set<std::string> seen;
  for (const auto& a : out.agents) {
    if (!seen.insert(a.id).second) throw ConfigError(fmt::format("agent id '{}' is used twice", a.id));
  }
  for (const auto& area : out.areas) {
    if (seen.count(area.id) || area.id == kCoreGroup) {
      throw ConfigError(fmt::format("area id '{}' collides with an agent id", area.id));
    }
  }

  // Links and groups.
  for (std::size_t i = 0; i < branches.size(); ++i) {
    for (std::size_t j = i + 1; j < branches.size(); ++j) {
      const auto& a = branches[i];
      const auto& b = branches[j];
      if (a.from_bus == b.from_bus || a.from_bus == b.to_bus || a.to_bus == b.from_bus || a.to_bus == b.to_bus) {
        out.links.link(a.id, b.id);
      }
    }
  }
  for (const auto& area : out.areas) {
    for (const auto& t : area.home_branches) out.home_regional[t] = area.regional_id;
    for (const auto& t : area.dgs) out.home_regional[t] = area.regional_id;
  }
  for (const auto& [terminal, regional] : out.home_regional) out.links.link(terminal, regional);
  std::vector<std::string> core{std::string(kCentralId)};
  for (const auto& area : out.areas) {
    out.links.link(area.regional_id, std::string(kCentralId));
    std::vector<std::string> members{area.regional_id};
    const auto terms = area.terminals();
    members.insert(members.end(), terms.begin(), terms.end());
    std::sort(members.begin(), members.end());
    out.links.groups[area.id] = std::move(members);
    core.push_back(area.regional_id);
  }
  std::sort(core.begin(), core.end());
  out.links.groups[std::string(kCoreGroup)] = std::move(core);
  return out;
}

}  // namespace mas::comms
